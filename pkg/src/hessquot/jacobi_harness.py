"""Pointwise Jacobi-inequality checks for W = D^2 u + chi on flat periodic grids.

With f := F(W(x)) and b := log(1 + lambda_1(W(x))), the harness evaluates

    sum F^{ab} b_ab - eps sum F^{ab} b_a b_b + C * Ftrace + |Df|^2 / (f (lambda_1 + 1)) + |D^2 f| / (lambda_1 + 1)

at every point where lambda_1 is simple (relative gap filter), together with
the Codazzi defect, the pointwise concavity residual along D_e W, the
second-order expansion of lambda_1, the Cauchy-Schwarz absorption step and
the b -> B = log(D + b) transform.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError
from .fields import ScalarField, SymTensorField, gradient, hessian, same_grid, tensor_gradient
from .inequality import residual_from_records
from .kernels import layout as L
from .operator import f_batch, gradient_diag_batch, quad_records
from .spectral import eigh_desc, eigh_desc_batch, sym_matrix

GAP_MIN = 1e-3
UMBILIC_TOL = 1e-12
PREJACOBI_TOL = 1e-8


def hessian_field(u, chi):
    """W = D^2 u + chi with 4th-order stencils; symmetric by construction."""
    if not isinstance(u, ScalarField) or not isinstance(chi, SymTensorField):
        raise InvalidInputError("expected a ScalarField and a SymTensorField")
    if not same_grid(u, chi):
        raise InvalidInputError(f"grid mismatch: u on {u.grid}/{u.spacing}, chi on {chi.grid}/{chi.spacing}")
    return SymTensorField(u.dim, u.grid, u.spacing, hessian(u.values, u.spacing) + chi.values)


def codazzi_defect_field(wf):
    """Pointwise Frobenius norm of T_kij = D_k w_ij - D_i w_kj (rotation invariant)."""
    g = tensor_gradient(wf.values, wf.spacing)  # [..., i, j, k] = D_k w_ij
    t = np.swapaxes(g, -1, -3) - g  # D_i w_kj - D_k w_ij, indexed [..., k, j, i]
    return np.sqrt(np.einsum("...ijk,...ijk->...", t, t))


def codazzi_defect(wf):
    """max over points and indices of |D_k w_ij - D_i w_kj|."""
    g = tensor_gradient(wf.values, wf.spacing)
    return float(np.abs(np.swapaxes(g, -1, -3) - g).max())


def _box_min(mask, radius=2):
    """Logical AND of ``mask`` over the periodic (2 radius + 1)^dim box."""
    out = mask.copy()
    for axis in range(mask.ndim):
        acc = out.copy()
        for s in range(1, radius + 1):
            acc &= np.roll(out, s, axis) & np.roll(out, -s, axis)
        out = acc
    return out


@dataclass(frozen=True)
class _Pointwise:
    lam: np.ndarray  # (P, n) descending
    frame: np.ndarray  # (P, n, n)
    fdiag: np.ndarray  # F^{aa} in the eigenframe
    f: np.ndarray


def _pointwise(wf, k):
    if not 1 <= k <= wf.dim:
        raise InvalidInputError(f"k={k} outside 1..{wf.dim}")
    lam, frame = eigh_desc_batch(wf.flat())
    bad = np.flatnonzero(lam[:, -1] <= 0.0)
    if bad.size:
        idx = np.unravel_index(bad[0], wf.grid)
        raise DomainError(
            f"W is not positive definite at grid index {tuple(int(i) for i in idx)} "
            f"(x = {tuple(float(c) for c in wf.coords(idx))}, lambda_n = {float(lam[bad[0], -1])!r}); "
            f"{bad.size} point(s) outside Gamma_n"
        )
    return _Pointwise(lam, frame, gradient_diag_batch(lam, k), f_batch(lam, k))


def gap_mask(lam, grid, gap_min=GAP_MIN):
    """Points whose whole stencil box has a simple lambda_1 (gap >= gap_min * lambda_1).

    A box that is umbilic (W a multiple of Id) throughout also passes: lambda_1 = tr W / n is
    smooth there.  A box mixing the two does not, since lambda_1 has a kink at the crossing.
    """
    if lam.shape[1] == 1:
        return np.ones(grid, dtype=bool)
    simple = (lam[:, 0] - lam[:, 1]) >= gap_min * lam[:, 0]
    umbilic = (lam[:, 0] - lam[:, -1]) <= UMBILIC_TOL * lam[:, 0]
    return _box_min(simple.reshape(grid)) | _box_min(umbilic.reshape(grid))


@dataclass(frozen=True)
class JacobiPointReport:
    index: tuple
    coords: tuple
    lambda1: float
    gap: float
    f: float
    b: float
    grad_contraction: float
    diffusion: float
    forcing: float
    grad_f_term: float
    hess_f_term: float

    def residual_at(self, eps, C):
        return (
            self.diffusion - eps * self.grad_contraction + C * self.forcing + self.grad_f_term + self.hess_f_term
        )


class JacobiReport:
    """Per-point Jacobi quantities for the gap-passing points, as arrays.

    Iterating yields :class:`JacobiPointReport` objects in grid order.
    """

    _ARRAYS = ("lambda1", "gap", "f", "b", "grad_contraction", "diffusion", "forcing", "grad_f_term", "hess_f_term")

    def __init__(self, field, k, eps, C, gap_min, arrays, mask):
        self.field = field
        self.k = k
        self.eps = float(eps)
        self.C = float(C)
        self.gap_min = float(gap_min)
        self.mask = mask
        self.flat_index = np.flatnonzero(mask.ravel())
        for name in self._ARRAYS:
            setattr(self, name, arrays[name].ravel()[self.flat_index])

    def __len__(self):
        return self.flat_index.size

    def __iter__(self):
        for p in range(len(self)):
            yield self[p]

    def __getitem__(self, p):
        idx = tuple(int(i) for i in np.unravel_index(self.flat_index[p], self.field.grid))
        vals = {name: float(getattr(self, name)[p]) for name in self._ARRAYS}
        return JacobiPointReport(index=idx, coords=self.field.coords(idx), **vals)

    @property
    def excluded(self):
        return self.field.npoints - len(self)

    def residual_at(self, eps=None, C=None):
        eps = self.eps if eps is None else eps
        C = self.C if C is None else C
        return self.diffusion - eps * self.grad_contraction + C * self.forcing + self.grad_f_term + self.hess_f_term

    @property
    def residual(self):
        return self.residual_at()

    def min_residual(self):
        return float(self.residual.min()) if len(self) else float("nan")

    def min_constant(self, eps=None):
        if not len(self):
            raise DomainError("no grid point passes the lambda_1 gap filter")
        base = self.residual_at(eps, 0.0)
        return float((-base / self.forcing).max())

    def lambda_ratio_min(self):
        """Empirical min of lambda_1 / f^{1/k} over reported points."""
        return float((self.lambda1 / self.f ** (1.0 / self.k)).min()) if len(self) else float("nan")


def jacobi_residual_field(wf, k, eps, C, gap_min=GAP_MIN):
    """Jacobi quantities at every gap-passing point; ``gap_min`` is relative to lambda_1."""
    if not isinstance(wf, SymTensorField):
        raise InvalidInputError("expected a SymTensorField")
    if eps < 0.0 or gap_min < 0.0:
        raise InvalidInputError("eps and gap_min must be non-negative")
    pw = _pointwise(wf, k)
    grid, n = wf.grid, wf.dim
    fab = np.einsum("pia,pa,pja->pij", pw.frame, pw.fdiag, pw.frame)
    lam1 = pw.lam[:, 0]
    b = np.log1p(lam1).reshape(grid)
    db = gradient(b, wf.spacing).reshape(-1, n)
    ddb = hessian(b, wf.spacing).reshape(-1, n, n)
    f = pw.f.reshape(grid)
    df = gradient(f, wf.spacing).reshape(-1, n)
    ddf = hessian(f, wf.spacing).reshape(-1, n, n)
    arrays = {
        "lambda1": lam1,
        "gap": pw.lam[:, 0] - pw.lam[:, 1] if n > 1 else np.zeros_like(lam1),
        "f": pw.f,
        "b": b.ravel(),
        "grad_contraction": np.einsum("pi,pij,pj->p", db, fab, db),
        "diffusion": np.einsum("pij,pij->p", fab, ddb),
        "forcing": pw.fdiag.sum(axis=1),
        "grad_f_term": (df * df).sum(axis=1) / (pw.f * (lam1 + 1.0)),
        "hess_f_term": np.sqrt((ddf * ddf).sum(axis=(1, 2))) / (lam1 + 1.0),
    }
    return JacobiReport(wf, k, eps, C, gap_min, arrays, gap_mask(pw.lam, grid, gap_min))


def min_constant_C(wf, k, eps, gap_min=GAP_MIN):
    """Least C with every point residual >= 0 (the residual is affine in C)."""
    return jacobi_residual_field(wf, k, eps, 0.0, gap_min).min_constant()


# pointwise concavity along D_e W --------------------------------------------


def frame_derivatives(wf, lam_frame=None):
    """D_{e_i} w_ab expressed in the eigenframe: array (P, i, a, b) with e_i the i-th eigenvector."""
    if lam_frame is None:
        lam_frame = eigh_desc_batch(wf.flat())
    _, q = lam_frame
    g = tensor_gradient(wf.values, wf.spacing).reshape(-1, wf.dim, wf.dim, wf.dim)  # (P, a, b, l)
    dir_deriv = np.einsum("pabl,pli->piab", g, q)
    xi = np.einsum("pca,picd,pdb->piab", q, dir_deriv, q)
    return 0.5 * (xi + np.swapaxes(xi, -1, -2))


def prejacobi_residual(wf, k, delta_tilde=1.0, epsilon0=0.0, gap_min=GAP_MIN):
    """Normalised concavity residual for xi = D_{e_i} W at gap-passing points.

    Returns an array (P_pass, n) of residual / scale (0 where xi vanishes).
    """
    if not 1 <= k <= wf.dim - 1:
        raise InvalidInputError(f"pointwise concavity needs 1 <= k <= n-1, got k={k}")
    pw = _pointwise(wf, k)
    xi = frame_derivatives(wf, (pw.lam, pw.frame))
    sel = np.flatnonzero(gap_mask(pw.lam, wf.grid, gap_min).ravel())
    n = wf.dim
    lam = np.repeat(pw.lam[sel], n, axis=0)
    rec = quad_records(lam, xi[sel].reshape(-1, n, n), k)
    res = residual_from_records(rec, n, k, delta_tilde, epsilon0)
    scale = rec[:, L.SCALE]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(scale > 0.0, res / np.where(scale > 0.0, scale, 1.0), 0.0)
    return out.reshape(-1, n)


def absorption_margin(wf, theta, gap_min=GAP_MIN):
    """min over points and a of w_{a1,1}^2 - (1-theta) w_{11,a}^2 + (1/theta - 1) d^2.

    d is the pointwise Codazzi defect norm, so the margin is non-negative up to roundoff.
    """
    if not 0.0 < theta < 1.0:
        raise InvalidInputError("theta must lie in (0, 1)")
    lam, q = eigh_desc_batch(wf.flat())
    g = tensor_gradient(wf.values, wf.spacing).reshape(-1, wf.dim, wf.dim, wf.dim)
    t = np.einsum("pija,pib,pjc,pad->pbcd", g, q, q, q, optimize=True)  # w_{bc,d} in frame
    d = codazzi_defect_field(wf).ravel()
    a = t[:, :, 0, 0]  # w_{a1,1}
    bb = t[:, 0, 0, :]  # w_{11,a}
    margin = a * a - (1.0 - theta) * bb * bb + (1.0 / theta - 1.0) * (d * d)[:, None]
    scale = a * a + bb * bb + (d * d)[:, None]
    sel = gap_mask(lam, wf.grid, gap_min).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0.0, margin / np.where(scale > 0.0, scale, 1.0), 0.0)
    return float(rel[sel].min()) if sel.any() else float("nan")


def lambda1_expansion_defect(w, xi, t):
    """lambda_1(W + t xi) minus its second-order expansion t xi_11 + t^2 sum xi_1b^2 / (lambda_1 - lambda_b).

    ``xi`` is given in the coordinates of ``w``; lambda_1(W) must be simple.
    """
    spec = eigh_desc(w)
    if spec.n > 1 and not spec.gap > 0.0:
        raise DomainError("lambda_1 is not simple")
    q = spec.frame
    x = q.T @ sym_matrix(xi) @ q
    lam1 = spec.lam[0]
    second = float(np.sum(x[0, 1:] ** 2 / (lam1 - spec.lam[1:])))
    moved = eigh_desc(sym_matrix(w) + t * sym_matrix(xi)).lam[0]
    return float(moved - (lam1 + t * x[0, 0] + t * t * second))


# b -> B = log(D + b) -----------------------------------------------------------


def _b_and_check(lambda1, D):
    if not lambda1 > -1.0:
        raise InvalidInputError("lambda1 must exceed -1")
    b = float(np.log1p(lambda1))
    if not D + b > 0.0:
        raise DomainError(f"D + b = {D + b!r} is not positive")
    return b


def b_to_B(lambda1, D, b_grad, b_hess):
    """Chain rule for B = log(D + b): (B_a, B_ab)."""
    s = D + _b_and_check(lambda1, D)
    g = np.asarray(b_grad, dtype=float)
    h = np.asarray(b_hess, dtype=float)
    return g / s, h / s - np.outer(g, g) / (s * s)


def b_to_B_check(lambda1, D, b_grad, b_hess):
    """Relative defects of e^B B_a = b_a and e^B (B_ab + B_a B_b) = b_ab for the chain-rule output."""
    s = D + _b_and_check(lambda1, D)
    g = np.asarray(b_grad, dtype=float)
    h = np.asarray(b_hess, dtype=float)
    bg, bh = b_to_B(lambda1, D, g, h)
    gd = np.abs(s * bg - g).max() / max(np.abs(g).max(), np.finfo(float).tiny)
    hmag = max(np.abs(h).max(), np.abs(np.outer(g, g)).max() / s, np.finfo(float).tiny)
    hd = np.abs(s * (bh + np.outer(bg, bg)) - h).max() / hmag
    return float(gd), float(hd)


def minimal_D(eps, C, lambda1):
    """Smallest D with sqrt(D + log(1 + lambda_1)) = 2/eps + C (strict inequality needs D above it)."""
    if not 0.0 < eps:
        raise InvalidInputError("eps must be positive")
    return (2.0 / eps + C) ** 2 - float(np.log1p(lambda1))


def jb_implication_margin(eps, C, D, lambda1, grad_contraction, forcing, grad_f_term, hess_f_term):
    """Worst-case slack of the transformed inequality when the b-inequality holds with equality.

    With s = D + b, P = sum F b_a b_b and g the two f-terms, the b-inequality gives
    sum F B_ab >= (eps P - C forcing - g) / s - P / s^2; the margin is that bound minus
    eps s P / (2 s^2) - (forcing + g) / sqrt(s).  Non-negative whenever
    sqrt(s) > 2/eps + C, eps <= 2 and C >= 0.
    """
    s = D + _b_and_check(lambda1, D)
    g = grad_f_term + hess_f_term
    lower = (eps * grad_contraction - C * forcing - g) / s - grad_contraction / (s * s)
    target = 0.5 * eps * grad_contraction / s - (forcing + g) / np.sqrt(s)
    return float(lower - target)


def refinement_order(coarse, fine, ratio=2.0):
    """Observed convergence order from errors at h and h / ratio."""
    if coarse <= 0.0 or fine <= 0.0:
        return float("inf")
    return float(np.log(coarse / fine) / np.log(ratio))
