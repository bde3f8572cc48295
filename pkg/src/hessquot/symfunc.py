"""Elementary symmetric polynomials, deleted variants and Garding cones."""

from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .errors import InvalidInputError


def as_vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("vector has non-finite entries")
    return x


@dataclass(frozen=True)
class SigmaTable:
    """All sigma_j of a vector plus the one- and two-deleted tables.

    ``values[j]`` is sigma_j(x), ``deleted1[a, j]`` is sigma_j(x|a) and
    ``deleted2[a, b, j]`` is sigma_j(x|ab) for a != b (zero on the diagonal).
    Indices are 0-based.
    """

    n: int
    values: np.ndarray
    deleted1: np.ndarray
    deleted2: np.ndarray

    def sigma(self, j):
        return float(self.values[j]) if 0 <= j <= self.n else 0.0

    def sigma_without(self, j, *drop):
        """sigma_j with one or two (distinct, 0-based) entries removed."""
        if len(drop) == 1:
            (a,) = drop
            return float(self.deleted1[a, j]) if 0 <= j <= self.n - 1 else 0.0
        a, b = drop
        if a == b:
            raise InvalidInputError("deleted pair must be distinct")
        return float(self.deleted2[a, b, j]) if 0 <= j <= self.n - 2 else 0.0


def sigma_table(x):
    x = as_vector(x)
    n = x.size
    row = x[None, :]
    values = kernels.esp(row, n)[0]
    d1 = kernels.esp_deleted1(row, n)[0, :, :n]
    d2 = kernels.esp_deleted2(row, n)[0, :, :, : max(n - 1, 0)]
    for arr in (values, d1, d2):
        arr.setflags(write=False)
    return SigmaTable(n=n, values=values, deleted1=d1, deleted2=d2)


def sigma(x, j):
    """sigma_j(x), with sigma_j := 0 for j < 0 or j > n."""
    x = as_vector(x)
    if j < 0 or j > x.size:
        return 0.0
    return float(kernels.esp(x[None, :], j)[0, j])


def in_gamma_cone(x, k):
    x = as_vector(x)
    if not 1 <= k <= x.size:
        raise InvalidInputError(f"cone order k={k} outside 1..{x.size}")
    return bool(np.all(kernels.esp(x[None, :], k)[0, 1:] > 0.0))


def newton_maclaurin_gap(x, k):
    """sigma_{k-1}(x)^2 - sigma_k(x) sigma_{k-2}(x)."""
    x = as_vector(x)
    if not 2 <= k <= x.size + 2:
        raise InvalidInputError(f"k={k} outside 2..{x.size + 2}")
    return sigma(x, k - 1) ** 2 - sigma(x, k) * sigma(x, k - 2)


def _binom(m, j):
    return comb(m, j) if 0 <= j <= m else 0


def newton_constant(m, k):
    """Sharp c with sigma_{k-1}^2 - sigma_k sigma_{k-2} >= c sigma_{k-1}^2 on m positive entries.

    When sigma_{k-1} vanishes identically (k - 1 > m) every c works; 1 is returned.
    """
    den = _binom(m, k - 1) ** 2
    if den == 0:
        return 1.0
    return 1.0 - _binom(m, k) * _binom(m, k - 2) / den


def pair_newton_constant(n, k):
    """The constant used on two-deleted tables of an n-vector."""
    return newton_constant(max(n - 2, 0), k)
