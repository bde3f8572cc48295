"""Residuals of the concavity inequalities, the epsilon_0 estimator and the
Monge-Ampere counterexample.

A residual is always "left side minus right side" of an inequality that is
claimed to hold, so a negative value is a violation.  Residuals are compared
against ``-tol * scale`` with a per-sample scale of the same homogeneity.
"""

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import kernels
from .errors import DomainError, InvalidInputError, StencilError, UnsupportedForTheoremError
from .kernels import layout as L
from .operator import _check, directional_second, quad_records, ratio_constant
from .sampling import SamplerConfig, iter_chunks, run_pool, sample_rotations, sample_spectra, sample_symmetric
from .spectral import diagonal_spectrum, eigh_desc, perturbation, sym_matrix
from .symfunc import in_gamma_cone

REPORT_TOL = 1e-9
GLZ_TOL = 1e-10
OC_TOL = 1e-4
RHO_MAX = 0.999


def _theorem_k(n, k):
    if k == n:
        raise UnsupportedForTheoremError(
            "k = n (Monge-Ampere) is excluded from the concavity theorem; "
            "use monge_ampere_counterexample / the 'counterexample' command"
        )
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k={k} outside 1..{n - 1}")


def residual_from_records(rec, n, k, delta_tilde, epsilon0=0.0):
    """Concavity residual for kernel records (any k, no range check)."""
    r = ratio_constant(n, k)
    lhs = -rec[..., L.TOTAL]
    rhs = (
        (1.0 + epsilon0) * rec[..., L.A11]
        + (1.0 - delta_tilde) * rec[..., L.BDIAG]
        - rec[..., L.GRAD] ** 2 / rec[..., L.FVAL]
        + rec[..., L.J3]
        + (1.0 + r) * rec[..., L.J1]
    )
    return lhs - rhs


def admissible_epsilon(rec, n, k, delta_tilde):
    """Largest epsilon_0 keeping each sample's residual >= 0; +inf when xi_11 = 0."""
    base = residual_from_records(rec, n, k, delta_tilde, 0.0)
    a11 = rec[..., L.A11]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a11 > 0.0, base / np.where(a11 > 0.0, a11, 1.0), np.inf)


def special_concavity_residual(spec, k, xi, delta_tilde, epsilon0):
    _check(spec, k)
    _theorem_k(spec.n, k)
    if not 0.0 < delta_tilde <= 1.0:
        raise InvalidInputError("delta_tilde must lie in (0, 1]")
    rec = quad_records(spec.lam[None, :], perturbation(xi, spec.n)[None], k)[0]
    return float(residual_from_records(rec, spec.n, k, delta_tilde, epsilon0))


def residual_scale(spec, k, xi):
    """F(lam) * ||xi||_F^2 / lam_n^2, homogeneous of the same degree as the residual."""
    _check(spec, k)
    rec = quad_records(spec.lam[None, :], perturbation(xi, spec.n)[None], k)[0]
    return float(rec[L.SCALE])


@dataclass(frozen=True)
class ConcavityParams:
    n: int
    k: int
    delta_tilde: float
    epsilon0: float = 0.0
    c_prime: float = float("nan")

    @property
    def delta0(self):
        """Root of c'(1 - d)^2 = delta_tilde d^2 in (0, 1), from the estimated c'."""
        return balance_delta0(self.c_prime, self.delta_tilde)

    @property
    def proof_epsilon(self):
        """delta_tilde * delta0^2, the epsilon_0 the balancing step would certify."""
        return self.delta_tilde * self.delta0**2


def balance_delta0(c_prime, delta_tilde):
    if not np.isfinite(c_prime) or c_prime <= 0.0:
        return float("nan")
    a = np.sqrt(c_prime)
    return float(a / (a + np.sqrt(delta_tilde)))


@dataclass
class ConcavityReport:
    params: ConcavityParams
    samples: int
    min_residual: float
    witness: dict
    verdict: str
    rng_seed: int
    workers: int = 1
    epsilon_estimate: float = float("inf")
    epsilon_witness: dict = None
    unconstrained: int = 0
    structural: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    def as_dict(self):
        out = asdict(self)
        out["params"]["delta0"] = self.params.delta0
        out["params"]["proof_epsilon"] = self.params.proof_epsilon
        return out


_STRUCT_KEYS = ("f1mono_min", "sigratio_min", "j1j2_min", "i3decomp_min", "i1_min", "i1p_minus_i1_min")


def _case2_c_prime(lam, xi, rec):
    """min of I1 / (A11 sigma_k^2 (1 - rho)^2) over samples with rho <= RHO_MAX.

    rho = max_{a>1} |xi_aa / lam_a| / |xi_11 / lam_1|; a sample with rho < delta_0
    is in the second branch of the argument for that delta_0.
    """
    if lam.shape[1] < 2:
        return np.inf
    diag = np.einsum("sii->si", xi)
    top = np.abs(diag[:, 0] / lam[:, 0])
    ok = (top > 0.0) & (rec[:, L.A11] > 0.0)
    if not ok.any():
        return np.inf
    rho = np.max(np.abs(diag[ok, 1:] / lam[ok, 1:]), axis=1) / top[ok]
    sel = rho <= RHO_MAX
    if not sel.any():
        return np.inf
    r = rec[ok][sel]
    val = r[:, L.I1] * r[:, L.FVAL] ** 2 / r[:, L.A11] / (1.0 - rho[sel]) ** 2
    return float(val.min())


def _concavity_task(config, worker, count, epsilon0, extra):
    n, k, dt = config.n, config.k, config.delta_tilde
    best = (np.inf, None)
    best_eps = (np.inf, None)
    unconstrained = 0
    struct = {key: np.inf for key in _STRUCT_KEYS}
    c_prime = np.inf
    chunks = list(iter_chunks(config, worker, count))
    if extra is not None and worker == 0:
        chunks.insert(0, extra)
    for lam, xi in chunks:
        rec = quad_records(lam, xi, k)
        scaled = residual_from_records(rec, n, k, dt, epsilon0) / rec[:, L.SCALE]
        scaled = np.where(rec[:, L.XI_NORM2] > 0.0, scaled, 0.0)
        i = int(np.argmin(scaled))
        if scaled[i] < best[0]:
            best = (float(scaled[i]), (lam[i].copy(), xi[i].copy()))
        eps = admissible_epsilon(rec, n, k, dt)
        unconstrained += int(np.sum(~np.isfinite(eps)))
        j = int(np.argmin(eps))
        if eps[j] < best_eps[0]:
            best_eps = (float(eps[j]), (lam[j].copy(), xi[j].copy()))
        with np.errstate(divide="ignore", invalid="ignore"):
            j1 = rec[:, L.J1]
            j1j2 = np.where(j1 > 0.0, (j1 - rec[:, L.J2]) / j1, 0.0)
            f2 = rec[:, L.FVAL] ** 2
            f2i3 = rec[:, L.I3] * f2
            jk = rec[:, L.J1] + rec[:, L.J2] + rec[:, L.J3] + rec[:, L.K1]
            i3d = np.where(f2i3 > 0.0, (f2i3 - jk) / f2i3, 0.0)
            mag = rec[:, L.SPLIT_MAG]
            i1 = np.where(mag > 0.0, rec[:, L.I1] * f2 / mag, 0.0)
            i1p = np.where(mag > 0.0, (rec[:, L.I1P] - rec[:, L.I1]) * f2 / mag, 0.0)
        for key, arr in (
            ("f1mono_min", rec[:, L.F1MONO_MIN]),
            ("sigratio_min", rec[:, L.SIGRATIO_MIN]),
            ("j1j2_min", j1j2),
            ("i3decomp_min", i3d),
            ("i1_min", i1),
            ("i1p_minus_i1_min", i1p),
        ):
            struct[key] = min(struct[key], float(np.min(arr)))
        c_prime = min(c_prime, _case2_c_prime(lam, xi, rec))
    return best, best_eps, unconstrained, struct, c_prime


def _witness(pair):
    if pair is None:
        return None
    lam, xi = pair
    return {"lam": [float(v) for v in lam], "xi": [[float(v) for v in row] for row in xi]}


def _counterexample_chunk(config):
    lam = np.arange(config.n, 0, -1, dtype=float)[None, :]
    xi = np.zeros((1, config.n, config.n))
    xi[0, 0, 0] = 1.0
    return lam, xi


def run_concavity_campaign(config, epsilon0=0.0):
    """Sample (lam, xi) pairs and collect residual statistics into a report."""
    if not isinstance(config, SamplerConfig):
        raise InvalidInputError("expected a SamplerConfig")
    if config.k != config.n:
        _theorem_k(config.n, config.k)
    extra = _counterexample_chunk(config) if config.k == config.n else None
    parts = run_pool(_concavity_task, config, float(epsilon0), extra)
    best = (np.inf, None)
    best_eps = (np.inf, None)
    unconstrained = 0
    struct = {key: np.inf for key in _STRUCT_KEYS}
    c_prime = np.inf
    for b, be, unc, st, cp in parts:
        if b[0] < best[0]:
            best = b
        if be[0] < best_eps[0]:
            best_eps = be
        unconstrained += unc
        for key in _STRUCT_KEYS:
            struct[key] = min(struct[key], st[key])
        c_prime = min(c_prime, cp)
    c_prime = c_prime if np.isfinite(c_prime) else float("nan")
    params = ConcavityParams(
        n=config.n, k=config.k, delta_tilde=config.delta_tilde, epsilon0=float(epsilon0), c_prime=c_prime
    )
    return ConcavityReport(
        params=params,
        samples=config.samples + (1 if extra is not None else 0),
        min_residual=best[0],
        witness=_witness(best[1]),
        verdict="pass" if best[0] >= -REPORT_TOL else "fail",
        rng_seed=config.seed,
        workers=config.workers,
        epsilon_estimate=best_eps[0],
        epsilon_witness=_witness(best_eps[1]),
        unconstrained=unconstrained,
        structural=struct,
    )


def estimate_epsilon0(n, k, delta_tilde, sampler):
    """Empirical upper bound on the admissible epsilon_0 and the campaign report.

    For k = n the Monge-Ampere construction is always part of the sample set,
    so the estimate collapses to zero (up to roundoff).
    """
    config = replace(sampler, n=n, k=k, delta_tilde=delta_tilde)
    report = run_concavity_campaign(config, epsilon0=0.0)
    return report.epsilon_estimate, report


def monge_ampere_record(n, lam=None, xi11=1.0):
    lam = np.arange(n, 0, -1, dtype=float) if lam is None else np.asarray(lam, dtype=float)
    spec = diagonal_spectrum(lam)
    if spec.n != n or not spec.positive_definite:
        raise DomainError("lam must be a positive descending vector of length n")
    xi = np.zeros((n, n))
    xi[0, 0] = xi11
    return quad_records(spec.lam[None, :], xi[None], n)[0]


def monge_ampere_counterexample(n, lam=None, xi11=1.0):
    """-F''(xi, xi) - [F^{11} xi_11^2 / lam_1 - (F^{11} xi_11)^2 / F] for F = sigma_n.

    Zero up to roundoff: determinants are affine in w_11.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rec = monge_ampere_record(n, lam, xi11)
    return float(-rec[L.TOTAL] - (rec[L.A11] - rec[L.GRAD] ** 2 / rec[L.FVAL]))


def counterexample_margin(n, epsilon0, lam=None, xi11=1.0):
    """Residual of the strengthened bound at the counterexample; negative for any epsilon0 > 0."""
    rec = monge_ampere_record(n, lam, xi11)
    return monge_ampere_counterexample(n, lam, xi11) - epsilon0 * float(rec[L.A11])


def _quotient(k, l):
    def q(m):
        lam = eigh_desc(m).lam
        e = kernels.esp(lam[None, :], k)[0]
        return e[k] / e[l]

    return q


def _in_cone(m, k):
    return in_gamma_cone(eigh_desc(m).lam, k)


def classical_concavity_residual(w, k, l, xi):
    """(1 - 1/(k-l)) (Q^{ab} xi_ab)^2 / Q - Q^{ab,cd} xi_ab xi_cd for Q = sigma_k / sigma_l.

    Derivatives are finite differences along xi.
    """
    w = sym_matrix(w)
    n = w.shape[0]
    xi = perturbation(xi, n)
    if not 0 <= l < k <= n:
        raise InvalidInputError(f"need 0 <= l < k <= n, got k={k}, l={l}, n={n}")
    if not _in_cone(w, k):
        raise DomainError("W is outside the Garding cone of order k")
    if not np.any(xi):
        return 0.0
    q = _quotient(k, l)
    h1 = 1e-5 * np.abs(w).max() / np.abs(xi).max()
    for _ in range(2):
        if _in_cone(w + 2 * h1 * xi, k) and _in_cone(w - 2 * h1 * xi, k):
            break
        h1 *= 0.1
    else:
        raise StencilError("stencil leaves cone")
    first = (q(w + h1 * xi) - q(w - h1 * xi)) / (2 * h1)
    second = directional_second(q, w, xi, cone=lambda m: _in_cone(m, k))
    return float((1.0 - 1.0 / (k - l)) * first**2 / q(w) - second)


def classical_scale(w, k, l, xi):
    lam = eigh_desc(w).lam
    e = kernels.esp(lam[None, :], k)[0]
    return float(e[k] / e[l] * np.sum(np.asarray(xi) ** 2) / lam[-1] ** 2)


def glz_records(lam, xi, k):
    return kernels.glz_pieces(lam, xi, k)


def glz_residual(spec, k, xi):
    """(sigma_k^{ab,cd} + w^{ad} sigma_k^{bc}) xi_ab xi_cd - (sigma_k^{aa} xi_aa)^2 / sigma_k."""
    _check(spec, k)
    rec = glz_records(spec.lam[None, :], perturbation(xi, spec.n)[None], k)[0]
    return float(rec[L.GLZ_LHS] - rec[L.GLZ_RHS])


def glz_scale(spec, k, xi):
    _check(spec, k)
    rec = glz_records(spec.lam[None, :], perturbation(xi, spec.n)[None], k)[0]
    return float(rec[L.GLZ_SCALE])


def _glz_task(config, worker, count):
    best = (np.inf, None)
    for lam, xi in iter_chunks(config, worker, count):
        rec = glz_records(lam, xi, config.k)
        scale = rec[:, L.GLZ_SCALE]
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(scale > 0.0, (rec[:, L.GLZ_LHS] - rec[:, L.GLZ_RHS]) / np.where(scale > 0.0, scale, 1.0), 0.0)
        i = int(np.argmin(rel))
        if rel[i] < best[0]:
            best = (float(rel[i]), (lam[i].copy(), xi[i].copy()))
    return best


def run_glz_campaign(config):
    """min of (lhs - rhs) / scale for the sigma_k lower bound; any 1 <= k <= n."""
    best = min(run_pool(_glz_task, config), key=lambda b: b[0])
    return {
        "min_residual": best[0],
        "witness": _witness(best[1]),
        "passed": best[0] >= -GLZ_TOL,
    }


def run_oc_campaign(n, k, l, samples, seed, cond_max=1e4):
    """Sample rotated W in Gamma_n and symmetric xi; min classical residual / scale.

    Points whose stencil cannot stay inside the cone are counted and skipped.
    """
    if not 0 <= l < k <= n:
        raise InvalidInputError(f"need 0 <= l < k <= n, got k={k}, l={l}, n={n}")
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    rng = np.random.default_rng([int(seed), 7919, n, k, l])
    lam = sample_spectra(rng, samples, n, cond_max)
    rot = sample_rotations(rng, samples, n)
    xis = sample_symmetric(rng, samples, n)
    best = (np.inf, None)
    skipped = 0
    for s in range(samples):
        w = (rot[s] * lam[s]) @ rot[s].T
        w = 0.5 * (w + w.T)
        try:
            res = classical_concavity_residual(w, k, l, xis[s])
        except StencilError:
            skipped += 1
            continue
        rel = res / classical_scale(w, k, l, xis[s])
        if rel < best[0]:
            best = (float(rel), (w, xis[s].copy()))
    witness = None
    if best[1] is not None:
        witness = {"w": [[float(v) for v in r] for r in best[1][0]], "xi": [[float(v) for v in r] for r in best[1][1]]}
    return {"min_residual": best[0], "witness": witness, "skipped": skipped, "passed": best[0] >= -OC_TOL}
