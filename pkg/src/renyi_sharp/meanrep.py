"""Weighted matrix geometric mean A #_β B.

``mean_eval`` evaluates A^{1/2} (A^{−1/2} B A^{−1/2})^β A^{1/2} directly;
``build_mean_constraint`` encodes T ⪯ A #_β B for dyadic β as 2n×2n PSD
blocks, one per binary digit, using

    A #_β B = A #_{1/2} (A #_{2β} B)          for β < 1/2,
    A #_β B = (A #_{2β−1} B) #_{1/2} B        for β > 1/2,

and T ⪯ A #_{1/2} B  ⇔  ∃ Z = Z† with [[A, Z], [Z, B]] ⪰ 0 and T ⪯ Z.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple, Union

import numpy as np
from hermitian_ops import (
    DEFAULT_RANK_TOL,
    DimensionMismatchError,
    HermitianOperator,
    OperatorLike,
    as_matrix,
    psd_power,
    subset_check,
    support_basis,
)

from .errors import NotDyadicError, OutOfRangeError, SupportViolationError
from .models import DyadicWeight
from .quantum import herm
from .sdp.program import AffineExpr, ProgramBuilder, Sandwich, block_selector

logger = logging.getLogger(__name__)

MAX_LEVEL = 14


def _mean_matrix(a: np.ndarray, b: np.ndarray, beta: float) -> np.ndarray:
    """Mean for invertible a (no support checks)."""
    root = psd_power(a, 0.5)
    inv_root = psd_power(a, -0.5)
    inner = herm(inv_root @ b @ inv_root)
    values, vectors = np.linalg.eigh(inner)
    values = np.clip(values, 0.0, None)
    powered = np.zeros_like(values)
    positive = values > 0
    powered[positive] = values[positive] ** beta
    return herm(root @ (vectors * powered) @ vectors.conj().T @ root)


def mean_eval(
    a: OperatorLike,
    b: OperatorLike,
    beta: float,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> HermitianOperator:
    """A #_β B with generalized inverses on supp(A).

    Raises:
        OutOfRangeError: If beta is negative
        DimensionMismatchError: If A and B differ in size
        SupportViolationError: If A is singular and B ≪ A fails
    """
    if beta < 0:
        raise OutOfRangeError(f"mean weight must be nonnegative, got {beta}")
    matrix_a, matrix_b = as_matrix(a), as_matrix(b)
    if matrix_a.shape != matrix_b.shape:
        raise DimensionMismatchError(
            f"mean_eval: shapes {matrix_a.shape} and {matrix_b.shape} differ"
        )
    if beta == 0:
        return HermitianOperator.from_matrix(herm(matrix_a))

    basis = support_basis(matrix_a, rank_tol)
    n = matrix_a.shape[0]
    if basis.shape[1] < n:
        if not subset_check(matrix_b, matrix_a, rank_tol):
            raise SupportViolationError(
                f"A has rank {basis.shape[1]} < {n} "
                "and B is not supported inside supp(A)"
            )
        if basis.shape[1] == 0:
            return HermitianOperator.from_matrix(np.zeros_like(matrix_a))
        reduced = _mean_matrix(
            herm(basis.conj().T @ matrix_a @ basis),
            herm(basis.conj().T @ matrix_b @ basis),
            beta,
        )
        return HermitianOperator.from_matrix(herm(basis @ reduced @ basis.conj().T))
    return HermitianOperator.from_matrix(_mean_matrix(matrix_a, matrix_b, beta))


def mean_eval_regularized(
    a: OperatorLike, b: OperatorLike, beta: float, eps: float
) -> HermitianOperator:
    """(A + εI) #_β B, which decreases to A #_β B as ε ↓ 0."""
    if eps <= 0:
        raise OutOfRangeError(f"eps must be positive, got {eps}")
    matrix_a = as_matrix(a)
    return mean_eval(matrix_a + eps * np.eye(matrix_a.shape[0]), b, beta)


def dyadic_approx(
    beta: Union[float, Fraction], level: int
) -> Tuple[DyadicWeight, DyadicWeight]:
    """Floor and ceiling of beta on the grid k/2^level."""
    if not 0 <= beta <= 1:
        raise OutOfRangeError(f"beta must lie in [0, 1], got {beta}")
    if not 1 <= level <= MAX_LEVEL:
        raise OutOfRangeError(f"level must lie in [1, {MAX_LEVEL}], got {level}")
    scaled = Fraction(beta) * 2**level
    lo = DyadicWeight(numerator=math.floor(scaled), level=level)
    hi = DyadicWeight(numerator=math.ceil(scaled), level=level)
    return lo, hi


def as_dyadic(beta: Union[DyadicWeight, Fraction, float]) -> DyadicWeight:
    if isinstance(beta, DyadicWeight):
        weight = beta
    else:
        weight = DyadicWeight.from_fraction(Fraction(beta))
    if weight.level > MAX_LEVEL:
        raise NotDyadicError(
            f"weight {weight} needs more than {MAX_LEVEL} binary digits"
        )
    return weight


@dataclass
class MeanConstraintBlock:
    """Blocks and rows emitted for one T ⪯ A #_β B constraint."""

    weight: DyadicWeight
    level: int
    block_dims: List[int] = field(default_factory=list)
    aux_names: List[str] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)


def build_mean_constraint(
    builder: ProgramBuilder,
    a: AffineExpr,
    b: AffineExpr,
    t: AffineExpr,
    beta: Union[DyadicWeight, Fraction, float],
    name: str = "mean",
) -> MeanConstraintBlock:
    """Add T ⪯ A #_β B to builder, most significant digit first.

    Raises:
        NotDyadicError: If beta is not a dyadic rational in [0, 1]
        DimensionMismatchError: If the operands differ in size
    """
    try:
        weight = as_dyadic(beta)
    except ValueError as e:
        raise NotDyadicError(str(e)) from e
    n = a.dim
    if b.dim != n or t.dim != n:
        raise DimensionMismatchError(
            f"Mean operands have dims {a.dim}, {b.dim}, {t.dim}"
        )

    block = MeanConstraintBlock(weight=weight, level=weight.level)
    if weight.numerator == 0:
        builder.add_psd(a - t, f"{name}.lower")
        block.labels.append(f"{name}.lower")
        return block
    if weight.fraction == 1:
        builder.add_psd(b - t, f"{name}.lower")
        block.labels.append(f"{name}.lower")
        return block

    first, second = block_selector(n, 0), block_selector(n, 1)
    corner_11 = Sandwich(first)
    corner_22 = Sandwich(second)
    off_diagonal = Sandwich(first, second)
    off_diagonal_imag = Sandwich(first, second, -1j)

    lower = t
    current = weight
    half = Fraction(1, 2)
    digit = 0
    while True:
        digit += 1
        aux = f"{name}.K{digit}"
        k = builder.variable(aux, 2 * n)
        block.aux_names.append(aux)
        block.block_dims.append(2 * n)

        builder.add_equality(k.map(off_diagonal_imag), f"{aux}.herm")
        builder.add_psd(k.map(off_diagonal) - lower, f"{aux}.lower")
        block.labels.extend([f"{aux}.herm", f"{aux}.lower"])

        if current.fraction == half:
            builder.add_equality(k.map(corner_11) - a, f"{aux}.a")
            builder.add_equality(k.map(corner_22) - b, f"{aux}.b")
            block.labels.extend([f"{aux}.a", f"{aux}.b"])
            break
        if current.fraction < half:
            builder.add_equality(k.map(corner_11) - a, f"{aux}.a")
            block.labels.append(f"{aux}.a")
            lower = k.map(corner_22)
            current = current.doubled()
        else:
            builder.add_equality(k.map(corner_22) - b, f"{aux}.b")
            block.labels.append(f"{aux}.b")
            lower = k.map(corner_11)
            current = current.doubled_minus_one()

    logger.debug(
        f"Mean constraint '{name}': β={weight}, {digit} blocks of dim {2 * n}"
    )
    return block
