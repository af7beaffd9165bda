"""Exceptions raised by renyi-sharp.

Linear-algebra errors (NonHermitianError, NotPSDError, DimensionMismatchError)
live in ``hermitian_ops`` and are re-exported here for convenience.
"""

from typing import TYPE_CHECKING, Optional

from hermitian_ops import DimensionMismatchError, NonHermitianError, NotPSDError

if TYPE_CHECKING:
    from .models import SolverSummary


class OutOfRangeError(ValueError):
    """A scalar parameter (gamma, alpha, epsilon, ...) is outside its domain."""


class SizeBudgetError(ValueError):
    """A program or tensor power exceeds the configured size budget."""

    def __init__(self, dimension: int, budget: int, what: str = "program") -> None:
        self.dimension = dimension
        self.budget = budget
        self.what = what
        super().__init__(
            f"{what} dimension {dimension} exceeds size budget {budget}"
        )


class SupportViolationError(ValueError):
    """Support condition B ≪ A does not hold where it is required."""


class NotDyadicError(ValueError):
    """A mean weight is not of the form k / 2^l."""


class SolverFailureError(RuntimeError):
    """The conic solver did not return a usable solution."""

    def __init__(self, message: str, summary: Optional["SolverSummary"] = None) -> None:
        self.summary = summary
        super().__init__(message)


__all__ = [
    "DimensionMismatchError",
    "NonHermitianError",
    "NotDyadicError",
    "NotPSDError",
    "OutOfRangeError",
    "SizeBudgetError",
    "SolverFailureError",
    "SupportViolationError",
]
