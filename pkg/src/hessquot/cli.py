"""Numerical checks for sigma_n / sigma_{n-k} concavity bounds and Jacobi-type inequalities.

Every command prints one JSON report on stdout.  Exit status: 0 when the
checked property holds, 1 when a violation (or a point outside Gamma_n) was
found, 2 on usage errors.
"""

import argparse
import datetime
import json
import math
import sys

import numpy as np

from . import __version__
from .checks import identity_suite
from .errors import DomainError, InvalidInputError
from .fields import build_family, parse_field_spec, read_field_csv, write_field_csv
from .inequality import (
    REPORT_TOL,
    counterexample_margin,
    estimate_epsilon0,
    monge_ampere_counterexample,
    monge_ampere_record,
    run_concavity_campaign,
    run_glz_campaign,
    run_oc_campaign,
)
from .jacobi_harness import (
    GAP_MIN,
    PREJACOBI_TOL,
    codazzi_defect,
    hessian_field,
    jacobi_residual_field,
    prejacobi_residual,
    refinement_order,
)
from .kernels import layout as L
from .sampling import SamplerConfig, default_seed

COUNTEREXAMPLE_TOL = 1e-12


class UsageError(Exception):
    pass


def jsonable(obj):
    """Plain-Python copy of ``obj`` with non-finite floats mapped to None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def emit(command, params, summary, args, witness=None, has_witness=True):
    doc = {"tool_version": __version__, "command": command}
    if not args.no_timestamp:
        doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    doc["params"] = params
    doc["summary"] = summary
    if has_witness:
        doc["witness"] = witness
    sys.stdout.write(json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n")


def _int_range(text):
    try:
        if "-" in text:
            lo, hi = (int(v) for v in text.split("-", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return list(range(lo, hi + 1))


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _sampler(args, n, k, delta_tilde=1.0):
    return SamplerConfig(
        n=n,
        k=k,
        delta_tilde=delta_tilde,
        samples=args.samples,
        seed=args.seed,
        cond_max=args.cond_max,
        adversarial=not args.no_adversarial,
        workers=args.workers,
    )


def _concavity_summary(report):
    d = report.as_dict()
    summary = {
        "passed": report.passed,
        "verdict": report.verdict,
        "samples": d["samples"],
        "min_residual": d["min_residual"],
        "epsilon_estimate": d["epsilon_estimate"],
        "epsilon_unconstrained": not math.isfinite(d["epsilon_estimate"]),
        "unconstrained_samples": d["unconstrained"],
        "c_prime": d["params"]["c_prime"],
        "delta0": d["params"]["delta0"],
        "proof_epsilon": d["params"]["proof_epsilon"],
        "structural": d["structural"],
        "epsilon_witness": d["epsilon_witness"],
    }
    return summary, d["witness"]


def cmd_verify(args):
    if args.k == args.n:
        raise UsageError(
            f"k = n = {args.n} is the Monge-Ampere case, which the concavity bound excludes; "
            f"run 'hessquot counterexample --n {args.n}' instead"
        )
    config = _sampler(args, args.n, args.k, args.delta_tilde)
    report = run_concavity_campaign(config, epsilon0=args.eps0)
    summary, witness = _concavity_summary(report)
    summary["tolerance"] = REPORT_TOL
    emit("verify", {**config.as_dict(), "epsilon0": args.eps0}, summary, args, witness)
    return 0 if report.passed else 1


def cmd_estimate_eps(args):
    config = _sampler(args, args.n, args.k, args.delta_tilde)
    estimate, report = estimate_epsilon0(args.n, args.k, args.delta_tilde, config)
    summary, _ = _concavity_summary(report)
    summary["passed"] = True
    summary["monge_ampere"] = args.k == args.n
    emit("estimate-eps", config.as_dict(), summary, args, report.epsilon_witness)
    return 0


def cmd_counterexample(args):
    lam = args.lam
    if lam is not None:
        if len(lam) != args.n:
            raise UsageError(f"--lam needs {args.n} values")
        if min(lam) <= 0.0 or any(a < b for a, b in zip(lam, lam[1:])):
            raise UsageError("--lam must be positive and descending")
    value = monge_ampere_counterexample(args.n, lam, args.xi11)
    margin = counterexample_margin(args.n, args.eps0, lam, args.xi11)
    rec = monge_ampere_record(args.n, lam, args.xi11)
    lam_used = list(np.arange(args.n, 0, -1, dtype=float)) if lam is None else lam
    xi = np.zeros((args.n, args.n))
    xi[0, 0] = args.xi11
    summary = {
        "passed": abs(value) <= COUNTEREXAMPLE_TOL,
        "value": value,
        "tolerance": COUNTEREXAMPLE_TOL,
        "epsilon0": args.eps0,
        "strengthened_margin": margin,
        "a11_term": float(rec[L.A11]),
    }
    params = {"n": args.n, "lam": lam_used, "xi11": args.xi11, "epsilon0": args.eps0}
    emit("counterexample", params, summary, args, {"lam": lam_used, "xi": xi})
    return 0 if summary["passed"] else 1


def cmd_identities(args):
    fault = "sign_flip" if args.inject_sign_flip else None
    results = identity_suite(
        args.n_range, args.k_range, samples=args.samples, seed=args.seed, cond_max=args.cond_max, fault=fault
    )
    worst = {}
    for r in results:
        cur = worst.get(r.name)
        if cur is None or (r.worst > cur["worst"] if r.name in ("quadratic_split", "guan_ma", "i3_rewrite") else r.worst < cur["worst"]):
            worst[r.name] = {"worst": r.worst, "tol": r.tol, "n": r.n, "k": r.k}
    failures = [r.as_dict() for r in results if not r.passed]
    summary = {"passed": not failures, "checks": len(results), "worst": worst, "failures": failures}
    params = {
        "n_range": args.n_range,
        "k_range": args.k_range,
        "samples": args.samples,
        "seed": args.seed,
        "cond_max": args.cond_max,
    }
    emit("identities", params, summary, args, has_witness=False)
    return 0 if summary["passed"] else 1


def cmd_oc_check(args):
    cases = []
    if args.k is not None:
        if args.l is None:
            raise UsageError("--k needs --l")
        cases = [(n, args.k, args.l) for n in args.n_range if args.k <= n]
    else:
        for n in args.n_range:
            for k, l in ((2, 0), (3, 1), (n, n - 1)):
                if k <= n and (n, k, l) not in cases:
                    cases.append((n, k, l))
    if not cases:
        raise UsageError("no (n, k, l) case to check")
    rows = []
    worst = (math.inf, None)
    for n, k, l in cases:
        res = run_oc_campaign(n, k, l, args.samples, args.seed, args.cond_max)
        rows.append({"n": n, "k": k, "l": l, "min_residual": res["min_residual"], "skipped": res["skipped"], "passed": res["passed"]})
        if res["min_residual"] < worst[0]:
            worst = (res["min_residual"], res["witness"])
    summary = {"passed": all(r["passed"] for r in rows), "min_residual": worst[0], "cases": rows}
    params = {"n_range": args.n_range, "samples": args.samples, "seed": args.seed, "cond_max": args.cond_max}
    emit("oc-check", params, summary, args, worst[1])
    return 0 if summary["passed"] else 1


def cmd_glz_check(args):
    rows = []
    worst = (math.inf, None)
    for n in args.n_range:
        for k in range(1, n + 1):
            res = run_glz_campaign(_sampler(args, n, k))
            rows.append({"n": n, "k": k, "min_residual": res["min_residual"], "passed": res["passed"]})
            if res["min_residual"] < worst[0]:
                worst = (res["min_residual"], res["witness"])
    summary = {"passed": all(r["passed"] for r in rows), "min_residual": worst[0], "cases": rows}
    params = {
        "n_range": args.n_range,
        "samples": args.samples,
        "seed": args.seed,
        "cond_max": args.cond_max,
        "adversarial": not args.no_adversarial,
        "workers": args.workers,
    }
    emit("glz-check", params, summary, args, worst[1])
    return 0 if summary["passed"] else 1


def _load_field(args, n_points):
    name, params = parse_field_spec(args.field)
    if name == "file":
        return read_field_csv(params["path"])
    u, chi = build_family(name, args.n, n_points, **params)
    return hessian_field(u, chi)


def _jacobi_level(wf, args):
    rep = jacobi_residual_field(wf, args.k, args.eps, args.c, args.gap_min)
    out = {
        "grid": list(wf.grid),
        "spacing": list(wf.spacing),
        "points": wf.npoints,
        "reported": len(rep),
        "excluded": rep.excluded,
        "codazzi_defect": codazzi_defect(wf),
        "min_residual": rep.min_residual(),
        "c_min": rep.min_constant() if len(rep) else None,
        "lambda1_over_f_root_min": rep.lambda_ratio_min(),
    }
    if 1 <= args.k <= wf.dim - 1 and len(rep):
        pre = prejacobi_residual(wf, args.k, args.delta_tilde, args.eps0, args.gap_min)
        out["prejacobi_min"] = float(pre.min())
    return rep, out


def _write_points_csv(path, rep):
    import csv

    dim = rep.field.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(dim)] + list(rep._ARRAYS) + ["residual"])
        res = rep.residual
        for p, pt in enumerate(rep):
            w.writerow([repr(c) for c in pt.coords] + [repr(getattr(pt, a)) for a in rep._ARRAYS] + [repr(float(res[p]))])


def cmd_jacobi(args):
    if args.n not in (2, 3):
        raise UsageError("--n must be 2 or 3")
    if args.solve_c and args.c is not None:
        raise UsageError("--c and --solve-c are exclusive")
    if args.c is None:
        args.c = 0.0
    name, _ = parse_field_spec(args.field)
    if name == "file" and args.refine:
        raise UsageError("--refine needs a built-in field family")
    wf = _load_field(args, args.grid)
    if args.field_out:
        write_field_csv(args.field_out, wf)
    rep, level = _jacobi_level(wf, args)
    summary = {"levels": [level]}
    if args.refine:
        fine_wf = _load_field(args, 2 * args.grid)
        _, fine = _jacobi_level(fine_wf, args)
        summary["levels"].append(fine)
        c0, c1 = level["c_min"], fine["c_min"]
        summary["c_min_relative_change"] = abs(c1 - c0) / max(abs(c0), abs(c1)) if max(abs(c0), abs(c1)) > 0 else 0.0
        summary["codazzi_order"] = refinement_order(level["codazzi_defect"], fine["codazzi_defect"])
    if args.out:
        _write_points_csv(args.out, rep)
    summary["min_residual"] = level["min_residual"]
    summary["c_min"] = level["c_min"]
    summary["excluded"] = level["excluded"]
    ok = level["reported"] > 0
    if args.solve_c:
        ok = ok and level["c_min"] is not None and math.isfinite(level["c_min"])
    else:
        ok = ok and level["min_residual"] >= 0.0
    if "prejacobi_min" in level:
        ok = ok and level["prejacobi_min"] >= -PREJACOBI_TOL
    summary["passed"] = bool(ok)
    witness = None
    if len(rep):
        p = int(np.argmin(rep.residual))
        pt = rep[p]
        witness = {"index": list(pt.index), "coords": list(pt.coords)}
    params = {
        "field": args.field,
        "n": wf.dim,
        "k": args.k,
        "grid": args.grid,
        "eps": args.eps,
        "c": None if args.solve_c else args.c,
        "solve_c": args.solve_c,
        "gap_min": args.gap_min,
        "delta_tilde": args.delta_tilde,
        "eps0": args.eps0,
        "refine": args.refine,
    }
    emit("jacobi", params, summary, args, witness)
    return 0 if ok else 1


def _common(p, samples, cond_max=1e4):
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--seed", type=int, default=None, help="defaults to $HESSQUOT_SEED, else 0")
    p.add_argument("--cond-max", type=float, default=cond_max)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-adversarial", action="store_true", help="plain Gaussian perturbations only")


def build_parser():
    parser = argparse.ArgumentParser(prog="hessquot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--no-timestamp", action="store_true", help="omit the timestamp (byte-stable output)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[parent], help="sample the strengthened concavity bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta-tilde", type=float, default=1.0)
    p.add_argument("--eps0", type=float, default=0.0)
    _common(p, 10_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("estimate-eps", parents=[parent], help="empirical upper bound on epsilon_0")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta-tilde", type=float, default=1.0)
    _common(p, 10_000)
    p.set_defaults(func=cmd_estimate_eps)

    p = sub.add_parser("counterexample", parents=[parent], help="Monge-Ampere equality case")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lam", type=_float_list, default=None, help="descending eigenvalues, comma separated")
    p.add_argument("--xi11", type=float, default=1.0)
    p.add_argument("--eps0", type=float, default=0.01)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("identities", parents=[parent], help="identity and structural-inequality suite")
    p.add_argument("--n-range", type=_int_range, default=_int_range("1-8"))
    p.add_argument("--k-range", type=_int_range, default=None)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cond-max", type=float, default=1e4)
    p.add_argument("--inject-sign-flip", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("oc-check", parents=[parent], help="classical quotient concavity bound")
    p.add_argument("--n-range", type=_int_range, default=_int_range("2-5"))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cond-max", type=float, default=1e4)
    p.set_defaults(func=cmd_oc_check)

    p = sub.add_parser("glz-check", parents=[parent], help="sigma_k second-derivative lower bound")
    p.add_argument("--n-range", type=_int_range, default=_int_range("1-8"))
    _common(p, 10_000)
    p.set_defaults(func=cmd_glz_check)

    p = sub.add_parser("jacobi", parents=[parent], help="Jacobi inequality on a periodic grid field")
    p.add_argument("--field", required=True, help="cosine:a=0.3,spread=1 | bumps:a=0.5,width=1 | constant:c=2 | file:PATH")
    p.add_argument("--n", type=int, default=2, help="dimension of the torus (2 or 3)")
    p.add_argument("--k", type=int, default=1, help="operator order, 1..n")
    p.add_argument("--grid", type=int, default=32, help="points per axis")
    p.add_argument("--eps", type=float, default=0.1, help="gradient weight")
    p.add_argument("--c", type=float, default=None, help="check the inequality with this constant")
    p.add_argument("--solve-c", action="store_true", help="report the least admissible constant")
    p.add_argument("--gap-min", type=float, default=GAP_MIN, help="relative lambda_1 gap filter")
    p.add_argument("--delta-tilde", type=float, default=1.0)
    p.add_argument("--eps0", type=float, default=0.0)
    p.add_argument("--refine", action="store_true", help="repeat on the 2x grid")
    p.add_argument("--out", default=None, help="per-point CSV")
    p.add_argument("--field-out", default=None, help="write the W field as CSV")
    p.set_defaults(func=cmd_jacobi)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if getattr(args, "seed", 0) is None:
        try:
            args.seed = default_seed()
        except InvalidInputError as exc:
            print(f"hessquot: error: {exc}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (UsageError, InvalidInputError) as exc:
        print(f"hessquot {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"hessquot {args.command}: {exc}", file=sys.stderr)
        return 1
