"""Data models for renyi-sharp results."""

import math
from enum import Enum
from fractions import Fraction
from typing import Any, List, Optional, Tuple

from hermitian_ops import HermitianOperator
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import NotDyadicError


class SolverStatus(str, Enum):
    """Conic solver termination status."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITER = "max_iter"
    NUMERICAL_FAILURE = "numerical_failure"


class CellStatus(str, Enum):
    """Outcome of one row in a sweep table."""

    OK = "ok"
    PARTIAL = "partial"
    FAILED = "failed"
    INFINITE = "infinite"


class OutputFormat(str, Enum):
    """CLI output format enumeration."""

    CSV = "csv"
    JSON = "json"
    TABLE = "table"


class DyadicWeight(BaseModel):
    """A weight numerator / 2^level in [0, 1], kept in lowest terms."""

    model_config = ConfigDict(frozen=True)

    numerator: int = Field(..., ge=0)
    level: int = Field(..., ge=0)

    @model_validator(mode="before")
    @classmethod
    def _reduce(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        numerator, level = int(data.get("numerator", -1)), int(data.get("level", 0))
        if level < 0 or numerator < 0 or numerator > 2**level:
            raise ValueError(
                f"Dyadic weight {numerator}/2^{level} is outside [0, 1]"
            )
        while level > 0 and numerator % 2 == 0:
            numerator //= 2
            level -= 1
        return {"numerator": numerator, "level": level}

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DyadicWeight":
        denominator = value.denominator
        if denominator & (denominator - 1):
            raise NotDyadicError(f"{value} is not a dyadic rational")
        return cls(numerator=value.numerator, level=denominator.bit_length() - 1)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, 2**self.level)

    @property
    def value(self) -> float:
        return self.numerator / 2**self.level

    def doubled(self) -> "DyadicWeight":
        """2β, for β ≤ 1/2."""
        return DyadicWeight.from_fraction(2 * self.fraction)

    def doubled_minus_one(self) -> "DyadicWeight":
        """2β − 1, for β ≥ 1/2."""
        return DyadicWeight.from_fraction(2 * self.fraction - 1)

    def __str__(self) -> str:
        return f"{self.numerator}/{2**self.level}"


class SolverSummary(BaseModel):
    """Diagnostics of one conic solve."""

    status: SolverStatus
    primal_obj: float
    dual_obj: float
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    dimension: int = 0
    rows: int = 0


class SharpBounds(BaseModel):
    """Closed-form bracket lower ≤ D# ≤ upper."""

    lower: float
    upper: float


class DivergenceResult(BaseModel):
    """Value of the state program together with its bracket and witness."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value_D: float
    value_Q: float
    alpha: float = Field(..., gt=1)
    alpha_effective: Optional[float] = None
    beta_bracket: Tuple[DyadicWeight, DyadicWeight]
    beta_used: DyadicWeight
    d_bracket: Tuple[float, float]
    witness_A: Optional[HermitianOperator] = None
    witness_residual: Optional[float] = None
    support_rank: int = 0
    solver: Optional[SolverSummary] = None
    iterations: int = 0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value_D) and self.value_D > 0

    @property
    def status(self) -> str:
        if self.is_infinite:
            return CellStatus.INFINITE.value
        return self.solver.status.value if self.solver else SolverStatus.OPTIMAL.value


class ChannelDivResult(BaseModel):
    """Value of the channel program."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value_D: float
    value_Q: float
    alpha: float = Field(..., gt=1)
    m: int = Field(1, ge=1)
    alpha_effective: Optional[float] = None
    beta_bracket: Tuple[DyadicWeight, DyadicWeight]
    beta_used: DyadicWeight
    d_bracket: Tuple[float, float]
    epigraph_t: float
    witness_A_XY: Optional[HermitianOperator] = None
    witness_residual: Optional[float] = None
    solver: Optional[SolverSummary] = None
    iterations: int = 0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value_D) and self.value_D > 0

    @property
    def status(self) -> str:
        if self.is_infinite:
            return CellStatus.INFINITE.value
        return self.solver.status.value if self.solver else SolverStatus.OPTIMAL.value


class HierarchyBound(BaseModel):
    """Finite-m sandwich around the regularized sandwiched channel divergence."""

    m: int = Field(..., ge=1)
    alpha: float
    d: int
    upper: float
    lower: float
    correction: float
    status: str = SolverStatus.OPTIMAL.value

    @model_validator(mode="after")
    def _ordered(self) -> "HierarchyBound":
        if not self.lower <= self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")
        return self


class CapacityResult(BaseModel):
    """Joint capacity-bound program at a single alpha."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha: float
    alpha_effective: Optional[float] = None
    value: float
    value_Q: float
    beta_used: DyadicWeight
    d_bracket: Tuple[float, float]
    minimizer_choi: Optional[HermitianOperator] = None
    minimizer_diamond: Optional[float] = None
    minimizer_feasible: bool = True
    solver: Optional[SolverSummary] = None


class CapacityRow(BaseModel):
    """Best capacity bound over an alpha grid for one channel parameter."""

    gamma: float
    best_alpha: Optional[float]
    value: float
    status: CellStatus
    failed_alphas: List[float] = Field(default_factory=list)


class ExponentRow(BaseModel):
    """Certified lower bound on the strong converse exponent at rate r."""

    r: float
    exponent: float
    best_alpha: Optional[float]
    status: CellStatus = CellStatus.OK
    failed_alphas: List[float] = Field(default_factory=list)


class RateBound(BaseModel):
    """Two-way assisted rate bound."""

    value: float
    best_alpha: Optional[float]
    correction: float
    status: CellStatus = CellStatus.OK
    failed_alphas: List[float] = Field(default_factory=list)
