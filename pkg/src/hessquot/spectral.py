"""Descending symmetric eigendecomposition and eigenframe rotation."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError


def sym_matrix(w):
    """Validate a square finite matrix and symmetrize it from its upper triangle."""
    w = np.array(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("matrix has non-finite entries")
    upper = np.triu(w)
    return upper + np.triu(w, 1).T


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues ``lam`` (descending), ``kappa = 1/lam`` and frame ``Q``.

    ``W = Q @ diag(lam) @ Q.T``; columns of ``frame`` are eigenvectors.
    """

    lam: np.ndarray
    kappa: np.ndarray
    frame: np.ndarray

    @property
    def n(self):
        return self.lam.size

    @property
    def gap(self):
        return float(self.lam[0] - self.lam[1]) if self.n > 1 else 0.0

    @property
    def positive_definite(self):
        return bool(self.lam[-1] > 0.0)

    def matrix(self):
        return (self.frame * self.lam) @ self.frame.T


def _sorted(lam, frame):
    order = np.argsort(-lam, axis=-1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=-1)
    frame = np.take_along_axis(frame, order[..., None, :], axis=-1)
    return lam, frame


def _reciprocal(lam):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(lam != 0.0, 1.0 / np.where(lam != 0.0, lam, 1.0), np.inf)


def eigh_desc(w):
    w = sym_matrix(w)
    vals, vecs, _ = kernels.eigh_jacobi(w[None])
    lam, frame = _sorted(vals[0], vecs[0])
    return EigenSpectrum(lam=lam, kappa=_reciprocal(lam), frame=frame)


def eigh_desc_batch(ws):
    """Batched :func:`eigh_desc`; returns ``(lam, frames)`` arrays, no validation."""
    ws = np.asarray(ws, dtype=float)
    vals, vecs, _ = kernels.eigh_jacobi(ws)
    return _sorted(vals, vecs)


def diagonal_spectrum(lam):
    """Spectrum of ``diag(lam)`` for an already descending ``lam`` (frame = Id)."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidInputError("lam must be a non-empty vector")
    if np.any(np.diff(lam) > 0.0):
        raise InvalidInputError("lam must be sorted in descending order")
    return EigenSpectrum(lam=lam.copy(), kappa=_reciprocal(lam), frame=np.eye(lam.size))


def perturbation(xi, n=None):
    xi = sym_matrix(xi)
    if n is not None and xi.shape[0] != n:
        raise InvalidInputError(f"perturbation is {xi.shape[0]}x{xi.shape[0]}, expected {n}x{n}")
    return xi


def rotate_to_frame(xi, spec):
    """``Q.T @ xi @ Q``: express ``xi`` in the eigenframe of ``spec``."""
    xi = perturbation(xi, spec.n)
    out = spec.frame.T @ xi @ spec.frame
    return 0.5 * (out + out.T)
