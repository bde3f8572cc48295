"""Numerical verification toolkit for the Hessian quotient F = sigma_n / sigma_{n-k}."""

from ._backend import BACKEND, HAS_NUMBA

__version__ = "0.1.0"

__all__ = ["BACKEND", "HAS_NUMBA", "__version__"]
