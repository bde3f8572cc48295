"""The quotient F = sigma_n / sigma_{n-k} = 1 / sigma_k(W^{-1}) and its derivatives.

Derivatives treat the entries w_ab and w_ba as independent variables, then
restrict to symmetric arguments.  Closed forms are evaluated at diagonal W,
so perturbations must be expressed in the eigenframe (see
:func:`hessquot.spectral.rotate_to_frame`).
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import DomainError, InvalidInputError, StencilError
from .kernels import layout as L
from .spectral import EigenSpectrum, eigh_desc, perturbation, sym_matrix
from .symfunc import pair_newton_constant


def _check(spec, k):
    if not isinstance(spec, EigenSpectrum):
        raise InvalidInputError("expected an EigenSpectrum")
    if not 1 <= k <= spec.n:
        raise InvalidInputError(f"k={k} outside 1..{spec.n}")
    if not spec.positive_definite:
        raise DomainError(f"eigenvalues {spec.lam} are not all positive")


def ratio_constant(n, k):
    """(n - k) / (n - 1), the weight on the mixed xi_{a1} terms; 0 when n = 1."""
    return (n - k) / (n - 1) if n > 1 else 0.0


def f_value(spec, k):
    _check(spec, k)
    lam = spec.lam[None, :]
    n = spec.n
    e = kernels.esp(lam, n)[0]
    return float(e[n] / e[n - k])


def f_value_from_kappa(spec, k):
    _check(spec, k)
    return float(1.0 / kernels.esp(spec.kappa[None, :], k)[0, k])


def f_gradient_diag(spec, k):
    """Diagonal first derivatives F^{aa}; off-diagonal ones vanish at diagonal W."""
    _check(spec, k)
    return gradient_diag_batch(spec.lam[None, :], k)[0]


def gradient_diag_batch(lam, k):
    """F^{aa} and F for each row of a (S, n) array of positive eigenvalues."""
    kap = 1.0 / np.asarray(lam, dtype=float)
    s = kernels.esp(kap, k)[:, k]
    d1 = kernels.esp_deleted1(kap, k)[:, :, k - 1]
    return d1 * kap * kap / (s * s)[:, None]


def f_batch(lam, k):
    kap = 1.0 / np.asarray(lam, dtype=float)
    return 1.0 / kernels.esp(kap, k)[:, k]


@dataclass(frozen=True)
class QuadFormBreakdown:
    """Pieces of the second-derivative quadratic form at diagonal W.

    ``total_quadform`` is F^{ab,cd} xi_ab xi_cd from the direct contraction;
    ``total_split`` is the same quantity rebuilt as -(I1' + I2 + I3) / sigma_k^2.
    I-terms carry the sigma_k(kappa)^2 normalisation; J and K terms do not.
    """

    I1prime: float
    I1: float
    I2: float
    I3: float
    I3_rewrite: float
    J1: float
    J2: float
    J3: float
    K1: float
    total_quadform: float
    total_split: float
    grad_contraction: float
    trace_F: float
    F: float
    magnitude: float

    @classmethod
    def from_record(cls, rec):
        return cls(
            I1prime=float(rec[L.I1P]),
            I1=float(rec[L.I1]),
            I2=float(rec[L.I2]),
            I3=float(rec[L.I3]),
            I3_rewrite=float(rec[L.I3_REWRITE]),
            J1=float(rec[L.J1]),
            J2=float(rec[L.J2]),
            J3=float(rec[L.J3]),
            K1=float(rec[L.K1]),
            total_quadform=float(rec[L.TOTAL]),
            total_split=float(rec[L.TOTAL_SPLIT]),
            grad_contraction=float(rec[L.GRAD]),
            trace_F=float(rec[L.TRACE]),
            F=float(rec[L.FVAL]),
            magnitude=float(max(rec[L.TOTAL_MAG], rec[L.SPLIT_MAG])),
        )

    def as_dict(self):
        return asdict(self)


def quad_records(lam, xi, k):
    """Kernel records for a batch of diagonal points; see :mod:`kernels._layout`."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[1]
    return kernels.quad_pieces(lam, xi, k, pair_newton_constant(n, k), ratio_constant(n, k))


def f_quadform_record(spec, k, xi):
    _check(spec, k)
    xi = perturbation(xi, spec.n)
    return quad_records(spec.lam[None, :], xi[None], k)[0]


def f_quadform(spec, k, xi):
    """Second-derivative form and its decomposition; ``xi`` in the eigenframe."""
    return QuadFormBreakdown.from_record(f_quadform_record(spec, k, xi))


def guanma_identity_sides(spec, k, xi_diag):
    """Both sides of the closed form for the bracketed diagonal expression.

    Left: -sum_{a!=c} s_{k-2}(kappa|ac) k_a^2 k_c^2 x_a x_c - sum s_{k-1}(kappa|a) k_a^3 x_a^2
    + (sum s_{k-1}(kappa|a) k_a^2 x_a)^2 / s_k.  Right: minus the Newton-gap
    weighted sum of (k_a x_a - k_b x_b)^2 over 2 s_k.  The left side is never
    positive.
    """
    _check(spec, k)
    xi_diag = np.asarray(xi_diag, dtype=float)
    if xi_diag.shape != (spec.n,):
        raise InvalidInputError(f"xi_diag must have length {spec.n}")
    rec = f_quadform_record(spec, k, np.diag(xi_diag))
    return float(rec[L.GM_LEFT]), float(rec[L.GM_RIGHT])


def fd_step(w, xi):
    """Step with |h xi| = 1e-4 |W|, so the relative roundoff does not depend on the size of xi."""
    return 1e-4 * np.abs(w).max() / np.abs(xi).max()


def second_difference(fun, h):
    """Five-point central second derivative of ``fun`` at 0."""
    return (-fun(2 * h) + 16 * fun(h) - 30 * fun(0.0) + 16 * fun(-h) - fun(-2 * h)) / (12 * h * h)


def _positive_definite(m):
    return eigh_desc(m).lam[-1] > 0.0


def directional_second(fun, w, xi, h=None, cone=_positive_definite):
    """d^2/dt^2 fun(W + t xi) at 0, shrinking h once if the stencil leaves the cone."""
    if not np.any(xi):
        return 0.0
    if h is None:
        h = fd_step(w, xi)

    def inside(step):
        return cone(w - 2 * step * xi) and cone(w + 2 * step * xi)

    if not inside(h):
        h *= 0.1
        if not inside(h):
            raise StencilError("stencil leaves cone")
    return second_difference(lambda t: fun(w + t * xi), h)


def f_quadform_fd(w, k, xi):
    """Finite-difference oracle for F^{ab,cd} xi_ab xi_cd at a general W."""
    w = sym_matrix(w)
    xi = perturbation(xi, w.shape[0])
    spec = eigh_desc(w)
    _check(spec, k)
    return directional_second(lambda m: f_value(eigh_desc(m), k), w, xi)


def f1_monotonicity_gap(spec, k, alpha):
    """F^{aa} lam_a / lam_1 - F^{11} for a 1-based index 2 <= alpha <= n."""
    _check(spec, k)
    if not 2 <= alpha <= spec.n:
        raise InvalidInputError(f"alpha={alpha} outside 2..{spec.n}")
    fd = f_gradient_diag(spec, k)
    a = alpha - 1
    return float(fd[a] * spec.lam[a] / spec.lam[0] - fd[0])
