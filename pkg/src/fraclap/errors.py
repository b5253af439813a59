"""Exception types shared across the package."""


class FraclapError(Exception):
    """Base class for all package-specific failures."""


class DomainError(FraclapError, ValueError):
    """A parameter lies outside the mathematical domain of the operation."""


class ConvergenceError(FraclapError):
    """An iterative or adaptive procedure exhausted its budget before reaching tolerance."""


class GridMismatchError(FraclapError, ValueError):
    """Two grid-bound objects do not share the same grid."""


class VerificationError(FraclapError):
    """A barrier / comparison verification search failed to produce an admissible object."""


class AmbiguousRegimeError(FraclapError):
    """Parameters sit on a zone boundary at floating-point resolution; classification refused."""
