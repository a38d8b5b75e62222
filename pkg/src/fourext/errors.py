"""Exception hierarchy shared by every module of the package."""


class FEError(Exception):
    """Base class for all package errors."""


class DomainError(FEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BranchCutError(DomainError):
    """A point lies on the branch cut (-1, 1) of the Joukowski inverse."""


class IndexRangeError(FEError, IndexError):
    """A basis or singular-value index is out of range."""


class ConvergenceError(FEError, ArithmeticError):
    """Quadrature refinement or an SVD iteration failed to converge."""


class PrecisionError(FEError, ArithmeticError):
    """The working precision cannot resolve the smallest singular value."""


class BudgetError(FEError):
    """A problem exceeds the configured size or runtime budget."""
