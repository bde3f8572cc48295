"""Batched numeric kernels with a numba path and a pure-numpy path.

The active path is fixed at import time by :mod:`hessquot._backend`.  Both
implementations stay importable (``loops`` / ``vectorized``) so tests and the
benchmark can compare them directly.
"""

import numpy as np

from .._backend import BACKEND, HAS_NUMBA
from . import _layout as layout
from . import _loops as loops
from . import _vectorized as vectorized

__all__ = [
    "BACKEND",
    "esp",
    "esp_deleted1",
    "esp_deleted2",
    "quad_pieces",
    "glz_pieces",
    "eigh_jacobi",
    "layout",
    "loops",
    "vectorized",
]

_impl = loops if HAS_NUMBA else vectorized

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


def _f64(a, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {a.shape}")
    return a


def esp(x, kmax, impl=None):
    """sigma_0..sigma_kmax of each row of ``x`` (shape (S, n))."""
    return (impl or _impl).esp(_f64(x, 2), int(kmax))


def esp_deleted1(x, kmax, impl=None):
    """``out[s, a, j]`` = sigma_j of row s with entry a removed."""
    return (impl or _impl).esp_deleted1(_f64(x, 2), int(kmax))


def esp_deleted2(x, kmax, impl=None):
    """``out[s, a, b, j]`` = sigma_j of row s with entries a and b removed (a != b)."""
    return (impl or _impl).esp_deleted2(_f64(x, 2), int(kmax))


def quad_pieces(lam, xi, k, c_nk, r_nk, impl=None):
    """Per-sample quadratic-form record; columns in :mod:`._layout`."""
    return (impl or _impl).quad_pieces(
        _f64(lam, 2), _f64(xi, 3), int(k), float(c_nk), float(r_nk)
    )


def glz_pieces(lam, xi, k, impl=None):
    return (impl or _impl).glz_pieces(_f64(lam, 2), _f64(xi, 3), int(k))


def eigh_jacobi(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS, impl=None):
    """Cyclic Jacobi on a batch of symmetric matrices; eigenvalues unsorted."""
    return (impl or _impl).eigh_jacobi(_f64(a, 3), float(tol), int(max_sweeps))
