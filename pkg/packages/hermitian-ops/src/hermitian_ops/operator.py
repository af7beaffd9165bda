"""Dense complex Hermitian operators and the matrix functions built on them.

Every operator is symmetrized on construction, so downstream code may assume
exact hermiticity. A single relative tolerance, ``DEFAULT_RANK_TOL``, decides
what counts as a zero eigenvalue for generalized inverses, supports and
support inclusion tests.
"""

import json
import math
from typing import Any, Dict, List, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

DEFAULT_HERM_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-9

# Relative slack for "PSD within tolerance" checks in matrix_power.
PSD_EPS = 1e-10


class NonHermitianError(ValueError):
    """Raised when a matrix is too far from Hermitian to be symmetrized."""


class NotPSDError(ValueError):
    """Raised when an operator required to be PSD has a negative eigenvalue."""


class DimensionMismatchError(ValueError):
    """Raised when operand dimensions are inconsistent."""


def _symmetrize(data: Dict[str, Any]) -> Dict[str, Any]:
    """Validated, symmetrized and read-only constructor arguments."""
    if "entries" not in data:
        return data

    matrix = np.array(data["entries"], dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(
            f"Expected a square matrix, got shape {matrix.shape}"
        )
    dim = data.get("dim", matrix.shape[0])
    if dim != matrix.shape[0]:
        raise DimensionMismatchError(
            f"Declared dim {dim} does not match matrix size {matrix.shape[0]}"
        )
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must be finite")

    herm_tol = data.get("herm_tol", DEFAULT_HERM_TOL)
    scale = max(1.0, float(np.max(np.abs(matrix))))
    residual = float(np.max(np.abs(matrix - matrix.conj().T)))
    if residual > 100 * herm_tol * scale:
        raise NonHermitianError(
            f"Matrix is not Hermitian: residual {residual:.3e} exceeds "
            f"{100 * herm_tol * scale:.3e}"
        )

    matrix = (matrix + matrix.conj().T) / 2
    matrix.setflags(write=False)
    return {"dim": dim, "entries": matrix, "herm_tol": herm_tol}


class HermitianOperator(BaseModel):
    """Immutable dense Hermitian matrix.

    ``entries`` is stored as a read-only complex ndarray of shape (dim, dim).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(..., ge=1, description="Matrix dimension")
    entries: np.ndarray = Field(..., description="dim x dim complex entries")
    herm_tol: float = Field(DEFAULT_HERM_TOL, ge=0, description="Hermiticity tolerance")

    def __init__(self, **data: Any) -> None:
        # Checked outside pydantic so the typed errors reach callers unwrapped.
        super().__init__(**_symmetrize(data))

    @classmethod
    def from_matrix(
        cls, matrix: Any, herm_tol: float = DEFAULT_HERM_TOL
    ) -> "HermitianOperator":
        """Build an operator from anything numpy can turn into a square matrix."""
        matrix = np.asarray(matrix, dtype=complex)
        return cls(dim=matrix.shape[0], entries=matrix, herm_tol=herm_tol)

    @classmethod
    def diag(cls, values: Sequence[float]) -> "HermitianOperator":
        """Build a diagonal operator."""
        return cls.from_matrix(np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls.from_matrix(np.eye(dim))

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "HermitianOperator":
        """Parse the shared matrix schema ``{"dim": n, "entries": [[re, im], ...]}``."""
        try:
            dim = int(data["dim"])
            pairs = data["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"Invalid matrix object: {exc}") from exc

        if dim < 1:
            raise ValueError(f"Matrix dim must be positive, got {dim}")
        if len(pairs) != dim * dim:
            raise DimensionMismatchError(
                f"Expected {dim * dim} entries for dim {dim}, got {len(pairs)}"
            )

        values: List[complex] = []
        for index, pair in enumerate(pairs):
            if len(pair) != 2:
                raise ValueError(f"Entry {index} must be a [re, im] pair, got {pair}")
            re, im = float(pair[0]), float(pair[1])
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ValueError(f"Entry {index} is not finite: {pair}")
            values.append(complex(re, im))

        return cls.from_matrix(np.array(values).reshape(dim, dim))

    @classmethod
    def from_json(cls, text: str) -> "HermitianOperator":
        return cls.from_json_dict(json.loads(text))

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in self.entries.ravel()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @property
    def matrix(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self.entries

    def is_real(self) -> bool:
        return bool(np.all(self.entries.imag == 0))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_same_dim(self, other)
        return HermitianOperator.from_matrix(self.entries + other.entries)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_same_dim(self, other)
        return HermitianOperator.from_matrix(self.entries - other.entries)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator.from_matrix(float(scalar) * self.entries)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return self.dim == other.dim and bool(
            np.array_equal(self.entries, other.entries)
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.entries.tobytes()))


class SpectralDecomposition(BaseModel):
    """Eigenvalues sorted ascending with the matching orthonormal eigenvectors."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def apply(self, fn: Any) -> np.ndarray:
        """Return U diag(fn(λ)) U†."""
        u = self.eigenvectors
        return (u * fn(self.eigenvalues)) @ u.conj().T


OperatorLike = Union[HermitianOperator, np.ndarray]


def as_matrix(op: OperatorLike) -> np.ndarray:
    """Return the dense complex matrix behind an operator-like value."""
    if isinstance(op, HermitianOperator):
        return op.entries
    matrix = np.asarray(op, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got {matrix.shape}")
    return matrix


def as_operator(op: OperatorLike) -> HermitianOperator:
    if isinstance(op, HermitianOperator):
        return op
    return HermitianOperator.from_matrix(op)


def _check_same_dim(a: OperatorLike, b: OperatorLike) -> None:
    da, db = as_matrix(a).shape[0], as_matrix(b).shape[0]
    if da != db:
        raise DimensionMismatchError(f"Dimension mismatch: {da} vs {db}")


def eig(op: OperatorLike) -> SpectralDecomposition:
    """Spectral decomposition with ascending real eigenvalues."""
    matrix = as_operator(op).entries
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def op_norm(op: OperatorLike) -> float:
    """Operator norm, max |λ_i|."""
    eigenvalues = np.linalg.eigvalsh(as_matrix(op))
    return float(np.max(np.abs(eigenvalues)))


def trace(op: OperatorLike) -> float:
    return float(np.trace(as_matrix(op)).real)


def kron(first: OperatorLike, second: OperatorLike) -> HermitianOperator:
    return HermitianOperator.from_matrix(np.kron(as_matrix(first), as_matrix(second)))


def _clamped_spectrum(
    op: OperatorLike, rank_tol: float = DEFAULT_RANK_TOL
) -> SpectralDecomposition:
    """Spectrum of a PSD operator with eigenvalues at or below rank_tol·λ_max zeroed."""
    decomposition = eig(op)
    eigenvalues = decomposition.eigenvalues
    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    eps = PSD_EPS * scale
    if eigenvalues[0] < -100 * eps:
        raise NotPSDError(
            f"Operator is not PSD: min eigenvalue {eigenvalues[0]:.3e} "
            f"(allowed {-100 * eps:.3e})"
        )
    clamped = np.where(eigenvalues > rank_tol * scale, eigenvalues, 0.0)
    return SpectralDecomposition(
        eigenvalues=clamped, eigenvectors=decomposition.eigenvectors
    )


def psd_power(
    matrix: np.ndarray, p: float, rank_tol: float = DEFAULT_RANK_TOL
) -> np.ndarray:
    """matrix_power on raw arrays; 0**p is taken to be 0 for every p."""
    spectrum = _clamped_spectrum(matrix, rank_tol)
    values = spectrum.eigenvalues
    positive = values > 0
    powered = np.zeros_like(values)
    powered[positive] = values[positive] ** p
    return spectrum.apply(lambda _: powered)


def matrix_power(
    op: OperatorLike, p: float, rank_tol: float = DEFAULT_RANK_TOL
) -> HermitianOperator:
    """H^p for PSD H, with generalized inverses on the support for p < 0."""
    return HermitianOperator.from_matrix(psd_power(as_matrix(op), p, rank_tol))


def support_projector(
    op: OperatorLike, rank_tol: float = DEFAULT_RANK_TOL
) -> HermitianOperator:
    """Projector onto the span of eigenvectors with |λ_i| > rank_tol·max|λ|."""
    basis = support_basis(op, rank_tol)
    return HermitianOperator.from_matrix(basis @ basis.conj().T)


def support_basis(op: OperatorLike, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the support (an isometry V with VV† = P)."""
    decomposition = eig(op)
    magnitudes = np.abs(decomposition.eigenvalues)
    scale = float(np.max(magnitudes)) if magnitudes.size else 0.0
    keep = magnitudes > rank_tol * scale
    return decomposition.eigenvectors[:, keep]


def subset_check(
    a: OperatorLike, b: OperatorLike, rank_tol: float = DEFAULT_RANK_TOL
) -> bool:
    """A ≪ B: the support of A lies inside the support of B."""
    _check_same_dim(a, b)
    matrix_a = as_matrix(a)
    norm_a = op_norm(matrix_a)
    if norm_a == 0:
        return True
    complement = np.eye(matrix_a.shape[0]) - support_projector(b, rank_tol).entries
    leak = complement @ matrix_a @ complement
    return op_norm((leak + leak.conj().T) / 2) <= rank_tol * norm_a
