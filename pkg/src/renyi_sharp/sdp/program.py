"""Modeling layer: Hermitian PSD variables, affine expressions and ConicProgram.

Every Hermitian n×n matrix is identified with its coordinates in the
orthonormal basis (under ⟨X, Y⟩ = Re tr XY)

    e_ii,  (e_ij + e_ji)/√2 for i < j,  i(e_ij − e_ji)/√2 for i > j,

stored at flat index i·n + j. A linear map between Hermitian spaces is then a
real matrix, and a matrix equality expands into n² scalar rows.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from hermitian_ops import DimensionMismatchError

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


def basis_elements(n: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Basis elements start..stop-1 as an array of shape (stop - start, n, n)."""
    stop = n * n if stop is None else stop
    indices = np.arange(start, stop)
    rows, cols = np.divmod(indices, n)
    local = np.arange(len(indices))
    basis = np.zeros((len(indices), n, n), dtype=complex)
    diag = rows == cols
    upper = rows < cols
    lower = rows > cols
    basis[local[diag], rows[diag], rows[diag]] = 1
    basis[local[upper], rows[upper], cols[upper]] = 1 / SQRT2
    basis[local[upper], cols[upper], rows[upper]] = 1 / SQRT2
    basis[local[lower], rows[lower], cols[lower]] = 1j / SQRT2
    basis[local[lower], cols[lower], rows[lower]] = -1j / SQRT2
    return basis


@lru_cache(maxsize=32)
def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal Hermitian basis as an array of shape (n², n, n)."""
    basis = basis_elements(n)
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=64)
def imaginary_mask(n: int) -> np.ndarray:
    """True at coordinates whose basis element is purely imaginary."""
    rows, cols = np.divmod(np.arange(n * n), n)
    mask = rows > cols
    mask.setflags(write=False)
    return mask


def hvec(matrix: np.ndarray) -> np.ndarray:
    """Coordinates of a Hermitian matrix (or a stack of them)."""
    matrix = np.asarray(matrix)
    n = matrix.shape[-1]
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    lower = upper.T
    coords = np.where(
        upper, SQRT2 * matrix.real, np.where(lower, SQRT2 * matrix.imag, matrix.real)
    )
    return coords.reshape(matrix.shape[:-2] + (n * n,))


def smat(coords: np.ndarray, n: int) -> np.ndarray:
    """Hermitian matrix (or stack) with the given coordinates."""
    grid = np.asarray(coords, dtype=float).reshape(np.shape(coords)[:-1] + (n, n))
    upper = np.triu(grid, 1) / SQRT2
    lower = np.tril(grid, -1) / SQRT2
    diagonal = grid * np.eye(n)
    return (
        diagonal
        + upper
        + np.swapaxes(upper, -1, -2)
        + 1j * (lower - np.swapaxes(lower, -1, -2))
    )


class LinearMap(ABC):
    """Real-linear map Herm(dim_in) → Herm(dim_out)."""

    dim_in: int
    dim_out: int

    @abstractmethod
    def apply(self, x: np.ndarray) -> np.ndarray:
        """Apply to one matrix or a stack of shape (..., dim_in, dim_in)."""

    def matrix_rep(self, chunk: int = 1024) -> np.ndarray:
        """Real (dim_out², dim_in²) matrix acting on coordinates."""
        size = self.dim_in**2
        if size <= chunk:
            return hvec(self.apply(hermitian_basis(self.dim_in))).T
        columns = [
            hvec(
                self.apply(
                    basis_elements(self.dim_in, start, min(start + chunk, size))
                )
            ).T
            for start in range(0, size, chunk)
        ]
        return np.hstack(columns)

    def __matmul__(self, inner: "LinearMap") -> "LinearMap":
        return Composed(self, inner)


class Sandwich(LinearMap):
    """X ↦ (c·L X R† + c̄·R X L†)/2; with L = R and c = 1 this is L X L†."""

    def __init__(
        self, left: np.ndarray, right: Optional[np.ndarray] = None, coeff: complex = 1.0
    ) -> None:
        self.left = np.asarray(left, dtype=complex)
        self.right = self.left if right is None else np.asarray(right, dtype=complex)
        if self.left.shape != self.right.shape:
            raise DimensionMismatchError(
                f"Sandwich factors differ: {self.left.shape} vs {self.right.shape}"
            )
        self.coeff = complex(coeff)
        self.dim_out, self.dim_in = self.left.shape

    def apply(self, x: np.ndarray) -> np.ndarray:
        lr = self.coeff * self.left @ x @ self.right.conj().T
        return (lr + np.swapaxes(lr, -1, -2).conj()) / 2


class Scaled(LinearMap):
    def __init__(self, inner: LinearMap, factor: float) -> None:
        self.inner = inner
        self.factor = float(factor)
        self.dim_in, self.dim_out = inner.dim_in, inner.dim_out

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.factor * self.inner.apply(x)


class Composed(LinearMap):
    """outer ∘ inner."""

    def __init__(self, outer: LinearMap, inner: LinearMap) -> None:
        if outer.dim_in != inner.dim_out:
            raise DimensionMismatchError(
                f"Cannot compose maps: {inner.dim_out} -> {outer.dim_in}"
            )
        self.outer, self.inner = outer, inner
        self.dim_in, self.dim_out = inner.dim_in, outer.dim_out

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.outer.apply(self.inner.apply(x))


class Identity(LinearMap):
    def __init__(self, dim: int) -> None:
        self.dim_in = self.dim_out = dim

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=complex)


class Trace(LinearMap):
    """X ↦ [[tr X]]."""

    def __init__(self, dim: int) -> None:
        self.dim_in, self.dim_out = dim, 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.trace(x, axis1=-2, axis2=-1)[..., None, None]


class ScalarEmbed(LinearMap):
    """[[t]] ↦ t·I_n."""

    def __init__(self, dim: int) -> None:
        self.dim_in, self.dim_out = 1, dim

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=complex)[..., 0:1, 0:1] * np.eye(self.dim_out)


class PartialTrace(LinearMap):
    """Trace out the subsystems whose keep_mask entry is False."""

    def __init__(self, dims: Sequence[int], keep_mask: Sequence[bool]) -> None:
        self.dims = list(dims)
        self.keep_mask = list(keep_mask)
        self.dim_in = int(np.prod(self.dims))
        kept = [d for d, keep in zip(self.dims, self.keep_mask) if keep]
        self.dim_out = int(np.prod(kept)) if kept else 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        batch = x.shape[:-2]
        offset = len(batch)
        tensor = x.reshape(batch + tuple(self.dims + self.dims))
        n = len(self.dims)
        for index in reversed(range(n)):
            if not self.keep_mask[index]:
                tensor = np.trace(
                    tensor, axis1=offset + index, axis2=offset + index + n
                )
                n -= 1
        return tensor.reshape(batch + (self.dim_out, self.dim_out))


class PartialTranspose(LinearMap):
    """Transpose the flagged subsystems. Self-adjoint and an involution."""

    def __init__(self, dims: Sequence[int], transpose_mask: Sequence[bool]) -> None:
        self.dims = list(dims)
        self.transpose_mask = list(transpose_mask)
        self.dim_in = self.dim_out = int(np.prod(self.dims))

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        batch = x.shape[:-2]
        offset = len(batch)
        n = len(self.dims)
        axes = list(range(offset + 2 * n))
        for index, flag in enumerate(self.transpose_mask):
            if flag:
                a, b = offset + index, offset + index + n
                axes[a], axes[b] = axes[b], axes[a]
        tensor = x.reshape(batch + tuple(self.dims + self.dims)).transpose(axes)
        return tensor.reshape(x.shape)


def block_selector(n: int, index: int, blocks: int = 2) -> np.ndarray:
    """n × (blocks·n) matrix picking block ``index`` out of a block vector."""
    selector = np.zeros((n, blocks * n))
    selector[:, index * n : (index + 1) * n] = np.eye(n)
    return selector


@dataclass
class AffineExpr:
    """Σ_b L_b(X_b) + C, an n×n Hermitian-valued affine expression."""

    dim: int
    terms: Tuple[Tuple[str, LinearMap], ...] = ()
    constant: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.constant is None:
            self.constant = np.zeros((self.dim, self.dim), dtype=complex)
        else:
            self.constant = np.asarray(self.constant, dtype=complex)
            if self.constant.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    f"Constant of shape {self.constant.shape} "
                    f"in a {self.dim}-dim expression"
                )
        for _, linear_map in self.terms:
            if linear_map.dim_out != self.dim:
                raise DimensionMismatchError(
                    f"Term of dim {linear_map.dim_out} in a {self.dim}-dim expression"
                )

    def _check(self, other: "AffineExpr") -> None:
        if other.dim != self.dim:
            raise DimensionMismatchError(
                f"Cannot combine expressions of dims {self.dim} and {other.dim}"
            )

    def __add__(self, other: "AffineExpr") -> "AffineExpr":
        self._check(other)
        return AffineExpr(
            self.dim, self.terms + other.terms, self.constant + other.constant
        )

    def __neg__(self) -> "AffineExpr":
        return self * -1.0

    def __sub__(self, other: "AffineExpr") -> "AffineExpr":
        return self + (-other)

    def __mul__(self, factor: float) -> "AffineExpr":
        terms = tuple((name, Scaled(m, factor)) for name, m in self.terms)
        return AffineExpr(self.dim, terms, float(factor) * self.constant)

    __rmul__ = __mul__

    def map(self, linear_map: LinearMap) -> "AffineExpr":
        """linear_map applied to the whole expression."""
        if linear_map.dim_in != self.dim:
            raise DimensionMismatchError(
                f"Map expects dim {linear_map.dim_in}, expression has {self.dim}"
            )
        terms = tuple((name, Composed(linear_map, m)) for name, m in self.terms)
        return AffineExpr(linear_map.dim_out, terms, linear_map.apply(self.constant))

    def evaluate(self, values: Dict[str, np.ndarray]) -> np.ndarray:
        result = np.array(self.constant, dtype=complex)
        for name, linear_map in self.terms:
            result = result + linear_map.apply(values[name])
        return result


@dataclass(frozen=True)
class BlockSpec:
    name: str
    dim: int


@dataclass
class ConicProgram:
    """min Σ_b ⟨c_b, X_b⟩ + offset  s.t.  Σ_b A_b x_b = rhs,  X_b ⪰ 0.

    All data lives in Hermitian coordinates: ``rows[b]`` is a sparse
    (m × dim_b²) matrix and ``objective[b]`` a dense dim_b² vector.
    """

    blocks: List[BlockSpec]
    rows: List[sp.csr_matrix]
    rhs: np.ndarray
    objective: List[np.ndarray]
    objective_offset: float = 0.0
    labels: List[str] = field(default_factory=list)
    name: str = "program"

    def __post_init__(self) -> None:
        self.validate()

    @property
    def num_rows(self) -> int:
        return int(self.rhs.shape[0])

    @property
    def total_dim(self) -> int:
        return sum(block.dim for block in self.blocks)

    def block_index(self, name: str) -> int:
        for index, block in enumerate(self.blocks):
            if block.name == name:
                return index
        raise KeyError(f"Unknown block '{name}'")

    def validate(self) -> None:
        if not (len(self.blocks) == len(self.rows) == len(self.objective)):
            raise DimensionMismatchError(
                "Block, row and objective lists differ in length"
            )
        names = [block.name for block in self.blocks]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate block names in {names}")
        for block, rows, objective in zip(self.blocks, self.rows, self.objective):
            if rows.shape != (self.num_rows, block.dim**2):
                raise DimensionMismatchError(
                    f"Block {block.name}: rows have shape {rows.shape}, "
                    f"expected {(self.num_rows, block.dim**2)}"
                )
            if objective.shape != (block.dim**2,):
                raise DimensionMismatchError(
                    f"Block {block.name}: objective has shape {objective.shape}"
                )
            if not np.all(np.isfinite(rows.data)) or not np.all(np.isfinite(objective)):
                raise ValueError(f"Block {block.name} has non-finite data")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("Right-hand side has non-finite entries")


class ProgramBuilder:
    """Assembles a ConicProgram from PSD variables and affine constraints."""

    def __init__(self, name: str = "program") -> None:
        self.name = name
        self._blocks: Dict[str, BlockSpec] = {}
        self._row_parts: List[Dict[str, np.ndarray]] = []
        self._rhs_parts: List[np.ndarray] = []
        self._labels: List[str] = []
        self._objective: Optional[AffineExpr] = None
        self._slack_count = 0

    def variable(self, name: str, dim: int) -> AffineExpr:
        """Declare a Hermitian PSD block and return it as an expression."""
        if name in self._blocks:
            raise ValueError(f"Variable '{name}' already declared")
        if dim < 1:
            raise ValueError(f"Variable '{name}' needs a positive dimension")
        self._blocks[name] = BlockSpec(name, dim)
        return AffineExpr(dim, ((name, Identity(dim)),))

    @staticmethod
    def constant(matrix: np.ndarray) -> AffineExpr:
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return AffineExpr(matrix.shape[0], (), matrix)

    @staticmethod
    def scalar(value: float) -> AffineExpr:
        return AffineExpr(1, (), np.array([[value]], dtype=complex))

    def add_equality(self, expr: AffineExpr, label: str = "eq") -> None:
        """expr = 0, expanded over the Hermitian basis into dim² rows."""
        parts: Dict[str, np.ndarray] = {}
        for name, linear_map in expr.terms:
            if name not in self._blocks:
                raise KeyError(f"Expression references undeclared variable '{name}'")
            if linear_map.dim_in != self._blocks[name].dim:
                raise DimensionMismatchError(
                    f"Term on '{name}' expects dim {linear_map.dim_in}"
                )
            rep = linear_map.matrix_rep()
            parts[name] = parts[name] + rep if name in parts else rep
        self._row_parts.append(parts)
        self._rhs_parts.append(-hvec(expr.constant))
        self._labels.extend(f"{label}[{k}]" for k in range(expr.dim**2))

    def add_psd(self, expr: AffineExpr, label: str = "psd") -> AffineExpr:
        """expr ⪰ 0 through a fresh slack block S with expr − S = 0."""
        self._slack_count += 1
        slack = self.variable(f"_slack{self._slack_count}:{label}", expr.dim)
        self.add_equality(expr - slack, label)
        return slack

    def add_epigraph(
        self, t: AffineExpr, h: AffineExpr, label: str = "epi"
    ) -> AffineExpr:
        """t·I − H ⪰ 0, i.e. λ_max(H) ≤ t, for a scalar expression t."""
        return self.add_psd(t.map(ScalarEmbed(h.dim)) - h, label)

    def minimize(self, expr: AffineExpr) -> None:
        if expr.dim != 1:
            raise DimensionMismatchError("Objective must be a scalar expression")
        self._objective = expr

    def block_dims(self) -> Dict[str, int]:
        return {name: block.dim for name, block in self._blocks.items()}

    def build(self) -> ConicProgram:
        blocks = list(self._blocks.values())
        m = sum(len(rhs) for rhs in self._rhs_parts)
        rhs = np.concatenate(self._rhs_parts) if self._rhs_parts else np.zeros(0)

        rows: List[sp.csr_matrix] = []
        for block in blocks:
            pieces = []
            for parts, part_rhs in zip(self._row_parts, self._rhs_parts):
                if block.name in parts:
                    pieces.append(sp.csr_matrix(parts[block.name]))
                else:
                    pieces.append(sp.csr_matrix((len(part_rhs), block.dim**2)))
            if pieces:
                stacked = sp.vstack(pieces, format="csr")
            else:
                stacked = sp.csr_matrix((0, block.dim**2))
            stacked.eliminate_zeros()
            rows.append(stacked)

        objective = [np.zeros(block.dim**2) for block in blocks]
        offset = 0.0
        if self._objective is not None:
            offset = float(self._objective.constant[0, 0].real)
            for name, linear_map in self._objective.terms:
                index = [b.name for b in blocks].index(name)
                objective[index] = objective[index] + linear_map.matrix_rep()[0]

        program = ConicProgram(
            blocks=blocks,
            rows=rows,
            rhs=rhs,
            objective=objective,
            objective_offset=offset,
            labels=list(self._labels),
            name=self.name,
        )
        logger.debug(
            f"Built program '{self.name}': {len(blocks)} blocks, "
            f"total dim {program.total_dim}, {m} rows"
        )
        return program


def evaluate(expr: AffineExpr, values: Dict[str, np.ndarray]) -> np.ndarray:
    """Value of an expression at a primal point (block name → matrix)."""
    return expr.evaluate(values)
