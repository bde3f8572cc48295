"""Time the compiled loop kernels against the numpy kernels on identical batches.

    python3 benchmarks/bench_backends.py --samples 20000 --n 6 --k 3

With HESSQUOT_DISABLE_NUMBA=1 the loop kernels run as plain Python, so the
loop column is skipped unless --force-loops is given.
"""

import argparse
import time

import numpy as np

from hessquot import BACKEND, HAS_NUMBA
from hessquot.kernels import eigh_jacobi, glz_pieces, loops, quad_pieces, vectorized
from hessquot.operator import ratio_constant
from hessquot.sampling import sample_batch
from hessquot.symfunc import pair_newton_constant


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-loops", action="store_true")
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    lam, xi = sample_batch(rng, args.samples, args.n, 1e4, adversarial=True)
    sym = xi + np.eye(args.n) * args.n
    c_nk, r_nk = pair_newton_constant(args.n, args.k), ratio_constant(args.n, args.k)
    cases = {
        "quad_pieces": lambda impl: quad_pieces(lam, xi, args.k, c_nk, r_nk, impl=impl),
        "glz_pieces": lambda impl: glz_pieces(lam, xi, args.k, impl=impl),
        "eigh_jacobi": lambda impl: eigh_jacobi(sym, impl=impl)[0],
    }
    run_loops = HAS_NUMBA or args.force_loops
    print(f"backend={BACKEND} samples={args.samples} n={args.n} k={args.k}")
    print(f"{'kernel':<14}{'numpy [s]':>12}{'loops [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases.items():
        t_vec, out_vec = best_of(lambda: fn(vectorized), args.repeat)
        if not run_loops:
            print(f"{name:<14}{t_vec:12.4f}{'-':>12}{'-':>10}{'-':>12}")
            continue
        fn(loops)  # compile outside the timed region
        t_loop, out_loop = best_of(lambda: fn(loops), args.repeat)
        if name == "eigh_jacobi":
            out_loop, out_vec = np.sort(out_loop, axis=-1), np.sort(out_vec, axis=-1)
        # columns can cancel to roundoff, so compare against each column's largest entry
        finite = np.isfinite(out_vec) & np.isfinite(out_loop)
        scale = np.max(np.where(finite, np.abs(out_vec), 0.0), axis=0, keepdims=True)
        diff = np.where(finite & (scale > 0.0), np.abs(out_loop - out_vec) / np.where(scale > 0.0, scale, 1.0), 0.0)
        print(f"{name:<14}{t_vec:12.4f}{t_loop:12.4f}{t_vec / t_loop:10.1f}{float(np.nanmax(diff)):12.1e}")


if __name__ == "__main__":
    main()
