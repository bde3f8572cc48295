"""Seeded samplers for eigenvalue spectra and perturbations, and the worker pool.

Spectra are log-uniform in [cond_max**-0.5, cond_max**0.5], sorted
descending.  With ``adversarial`` on, samples cycle through families that
target both branches of the concavity argument (|xi_aa / lam_a| above or
below |xi_11 / lam_1|) plus a few degenerate shapes.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError

SEED_ENV = "HESSQUOT_SEED"
CHUNK = 8192

FAMILIES = (
    "gaussian",
    "gaussian",
    "gaussian",
    "xi11_only",
    "diag_prop_lambda",
    "rank_one",
    "case2_diag",
    "first_row",
    "repeated_lambda",
)


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidInputError(f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass(frozen=True)
class SamplerConfig:
    n: int
    k: int
    delta_tilde: float = 1.0
    samples: int = 10_000
    seed: int = 0
    cond_max: float = 1e4
    adversarial: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")
        if not 1 <= self.k <= self.n:
            raise InvalidInputError(f"k={self.k} outside 1..{self.n}")
        if self.samples < 1:
            raise InvalidInputError("samples must be >= 1")
        if not self.cond_max >= 1.0:
            raise InvalidInputError("cond_max must be >= 1")
        if self.workers < 1:
            raise InvalidInputError("workers must be >= 1")
        if not 0.0 < self.delta_tilde <= 1.0:
            raise InvalidInputError("delta_tilde must lie in (0, 1]")

    def as_dict(self):
        return asdict(self)


def sample_spectra(rng, size, n, cond_max):
    half = 0.5 * np.log(cond_max)
    lam = np.exp(rng.uniform(-half, half, size=(size, n)))
    return -np.sort(-lam, axis=1)


def sample_symmetric(rng, size, n):
    g = rng.standard_normal((size, n, n))
    return 0.5 * (g + g.transpose(0, 2, 1))


def sample_rotations(rng, size, n):
    """Haar-distributed orthogonal matrices."""
    g = rng.standard_normal((size, n, n))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.einsum("sii->si", r))[:, None, :]


def _apply_family(name, rng, lam, xi):
    size, n = lam.shape
    if name == "gaussian":
        return lam, xi
    if name == "xi11_only":
        out = np.zeros_like(xi)
        out[:, 0, 0] = rng.standard_normal(size)
        return lam, out
    if name == "diag_prop_lambda":
        c = rng.standard_normal(size)
        return lam, np.einsum("s,si,ij->sij", c, lam, np.eye(n))
    if name == "rank_one":
        v = rng.standard_normal((size, n))
        return lam, v[:, :, None] * v[:, None, :]
    if name == "case2_diag":
        # |xi_aa / lam_a| well below |xi_11 / lam_1| for every a > 1
        out = np.zeros_like(xi)
        x11 = rng.standard_normal(size)
        ratio = 10.0 ** rng.uniform(-4.0, -0.1, size=(size, n))
        signs = rng.choice([-1.0, 1.0], size=(size, n))
        d = signs * ratio * np.abs(x11 / lam[:, 0])[:, None] * lam
        d[:, 0] = x11
        idx = np.arange(n)
        out[:, idx, idx] = d
        # off-diagonal noise keeps the diagonal ratios intact
        out += 1e-2 * np.abs(x11)[:, None, None] * (xi - xi * np.eye(n))
        return lam, out
    if name == "first_row":
        out = np.zeros_like(xi)
        out[:, 0, :] = xi[:, 0, :]
        out[:, :, 0] = xi[:, 0, :]
        return lam, out
    if name == "repeated_lambda":
        lam = lam.copy()
        if n > 1:
            cut = rng.integers(2, n + 1, size=size)
            mask = np.arange(n)[None, :] < cut[:, None]
            lam = np.where(mask, lam[:, :1], lam)
        return lam, xi
    raise InvalidInputError(f"unknown family {name!r}")


def sample_batch(rng, size, n, cond_max, adversarial, offset=0):
    """Draw ``size`` pairs (lam, xi) with xi in the eigenframe of diag(lam)."""
    lam = sample_spectra(rng, size, n, cond_max)
    xi = sample_symmetric(rng, size, n)
    if not adversarial:
        return lam, xi
    fam = (np.arange(offset, offset + size)) % len(FAMILIES)
    for j, name in enumerate(FAMILIES):
        sel = fam == j
        if name == "gaussian" or not sel.any():
            continue
        lam[sel], xi[sel] = _apply_family(name, rng, lam[sel], xi[sel])
    return lam, xi


def worker_counts(total, workers):
    base, extra = divmod(total, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def worker_rng(seed, worker):
    return np.random.default_rng([int(seed), int(worker)])


def iter_chunks(config, worker, count, chunk=CHUNK):
    """Deterministic stream of (lam, xi) chunks for one worker."""
    rng = worker_rng(config.seed, worker)
    done = 0
    while done < count:
        size = min(chunk, count - done)
        yield sample_batch(rng, size, config.n, config.cond_max, config.adversarial, offset=done)
        done += size


def run_pool(task, config, *args):
    """Run ``task(config, worker, count, *args)`` for every worker; results in worker order."""
    counts = worker_counts(config.samples, config.workers)
    jobs = [(config, w, c) + args for w, c in enumerate(counts) if c > 0]
    if config.workers == 1:
        return [task(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(task, *job) for job in jobs]
        return [f.result() for f in futures]
