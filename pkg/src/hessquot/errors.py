"""Exception hierarchy."""


class HessQuotError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(HessQuotError, ValueError):
    """Malformed arguments: wrong shapes, out-of-range orders, non-finite data."""


class DomainError(HessQuotError, ValueError):
    """Argument outside the positive cone where the operator is defined."""


class StencilError(DomainError):
    """A finite-difference stencil left the cone."""


class UnsupportedForTheoremError(InvalidInputError):
    """The concavity residual is only defined for 1 <= k <= n-1."""
