"""Identity and structural-inequality suite over seeded random spectra.

Each check reduces a batch of kernel records to a worst normalised defect;
identities compare two routes relative to the magnitude of the terms they
sum, inequalities report the most negative normalised residual.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .inequality import GLZ_TOL, glz_records
from .kernels import layout as L
from .operator import quad_records, ratio_constant
from .sampling import sample_batch, worker_rng

TOLERANCES = {
    "quadratic_split": 1e-9,
    "guan_ma": 1e-10,
    "i3_rewrite": 1e-10,
    "glz": GLZ_TOL,
    "f1_monotone": 1e-12,
    "sigma_ratio": 1e-12,
    "j1_k1": 1e-12,
    "j1_j2": 1e-12,
    "i3_decomposition": 1e-12,
    "newton_step": 1e-12,
}
IDENTITIES = ("quadratic_split", "guan_ma", "i3_rewrite")


@dataclass(frozen=True)
class CheckResult:
    name: str
    n: int
    k: int
    samples: int
    worst: float
    tol: float

    @property
    def passed(self):
        if self.name in IDENTITIES:
            return self.worst <= self.tol
        return self.worst >= -self.tol

    def as_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)


def defects(rec, glz, n, k, fault=None):
    """Per-check worst values for one batch of records."""
    f2 = rec[:, L.FVAL] ** 2
    split = rec[:, L.TOTAL_SPLIT]
    if fault == "sign_flip":
        split = split + 2.0 * rec[:, L.I2] * f2
    mag = np.maximum(rec[:, L.TOTAL_MAG], rec[:, L.SPLIT_MAG])
    r = ratio_constant(n, k)
    j1, j2, k1 = rec[:, L.J1], rec[:, L.J2], rec[:, L.K1]
    f2i3 = rec[:, L.I3] * f2
    jk = j1 + j2 + rec[:, L.J3] + k1
    out = {
        "quadratic_split": _ratio(np.abs(rec[:, L.TOTAL] - split), mag).max(),
        "guan_ma": _ratio(np.abs(rec[:, L.GM_LEFT] - rec[:, L.GM_RIGHT]), rec[:, L.GM_MAG]).max(),
        "i3_rewrite": _ratio(np.abs(rec[:, L.I3] - rec[:, L.I3_REWRITE]), rec[:, L.I3_MAG]).max(),
        "glz": _ratio(glz[:, L.GLZ_LHS] - glz[:, L.GLZ_RHS], glz[:, L.GLZ_SCALE]).min(),
        "f1_monotone": rec[:, L.F1MONO_MIN].min(),
        "sigma_ratio": rec[:, L.SIGRATIO_MIN].min(),
        "j1_k1": _ratio(j1 + k1 - (1.0 + r) * j1, j1 + k1).min(),
        "j1_j2": _ratio(j1 - j2, j1).min(),
        "i3_decomposition": _ratio(f2i3 - jk, f2i3).min(),
        "newton_step": _ratio(np.minimum(rec[:, L.I1P] - rec[:, L.I1], rec[:, L.I1]) * f2, rec[:, L.SPLIT_MAG]).min(),
    }
    return {key: float(v) for key, v in out.items()}


def identity_suite(n_values, k_values=None, samples=10_000, seed=0, cond_max=1e4, fault=None, chunk=8192):
    """Run every check for each (n, k); ``k_values`` defaults to 1..n."""
    results = []
    for n in n_values:
        ks = [k for k in (k_values or range(1, n + 1)) if 1 <= k <= n]
        for k in ks:
            rng = worker_rng(seed, 1000 * n + k)
            worst = {}
            done = 0
            while done < samples:
                size = min(chunk, samples - done)
                lam, xi = sample_batch(rng, size, n, cond_max, adversarial=True, offset=done)
                rec = quad_records(lam, xi, k)
                glz = glz_records(lam, xi, k)
                for key, val in defects(rec, glz, n, k, fault).items():
                    if key not in worst:
                        worst[key] = val
                    elif key in IDENTITIES:
                        worst[key] = max(worst[key], val)
                    else:
                        worst[key] = min(worst[key], val)
                done += size
            for key, tol in TOLERANCES.items():
                results.append(CheckResult(key, n, k, samples, worst[key], tol))
    return results
