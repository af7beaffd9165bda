"""States, channels and channel calculus.

Choi matrices use X⊗Y ordering (input/reference system first) and the
unnormalized maximally entangled operator Φ = Σ |x⟩⟨x'| ⊗ |x⟩⟨x'|, so a
trace-preserving map has tr J = dim_in.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from hermitian_ops import (
    DimensionMismatchError,
    HermitianOperator,
    NotPSDError,
    OperatorLike,
    as_matrix,
    eig,
    op_norm,
    psd_power,
)
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import OutOfRangeError, SizeBudgetError

logger = logging.getLogger(__name__)

DEFAULT_SPEC_TOL = 1e-9
PSD_TOL = 1e-10
CHOI_TOL = 1e-9
DEFAULT_SIZE_BUDGET = 1200


def herm(matrix: np.ndarray) -> np.ndarray:
    """Hermitian part (M + M†)/2."""
    return (matrix + matrix.conj().T) / 2


def _check_dims(matrix: np.ndarray, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != matrix.shape[0]:
        raise DimensionMismatchError(
            f"Subsystem dims {list(dims)} do not multiply to {matrix.shape[0]}"
        )


def _min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(herm(matrix))[0])


class QState(BaseModel):
    """PSD operator with subsystem structure. Normalization is not enforced."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    op: HermitianOperator
    dims: List[int] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _default_dims(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("dims"):
            op = data.get("op")
            if isinstance(op, HermitianOperator):
                return {**data, "dims": [op.dim]}
        return data

    def __init__(self, **data: Any) -> None:
        # Checks run after pydantic validation so NotPSDError and
        # DimensionMismatchError reach callers unwrapped.
        super().__init__(**data)
        self._check()

    def _check(self) -> None:
        _check_dims(self.op.entries, self.dims)
        scale = op_norm(self.op)
        minimum = _min_eigenvalue(self.op.entries)
        if minimum < -PSD_TOL * max(scale, 1.0):
            raise NotPSDError(f"State is not PSD: min eigenvalue {minimum:.3e}")

    @classmethod
    def from_matrix(cls, matrix: Any, dims: Optional[List[int]] = None) -> "QState":
        return cls(op=HermitianOperator.from_matrix(matrix), dims=dims or [])

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "QState":
        """Matrix schema plus an optional ``dims`` list."""
        return cls(
            op=HermitianOperator.from_json_dict(data), dims=data.get("dims") or []
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "QState":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    @property
    def trace_value(self) -> float:
        return float(np.trace(self.op.entries).real)


class QChannel(BaseModel):
    """Completely positive map X → Y held as its Choi matrix (and Kraus list)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim_in: int = Field(..., ge=1)
    dim_out: int = Field(..., ge=1)
    choi: HermitianOperator
    kraus: Optional[List[np.ndarray]] = None
    name: str = "channel"

    def __init__(self, **data: Any) -> None:
        super().__init__(**data)
        self._check()

    def _check(self) -> None:
        d = self.dim_in * self.dim_out
        if self.choi.dim != d:
            raise DimensionMismatchError(
                f"Choi dim {self.choi.dim} does not match {self.dim_in}x{self.dim_out}"
            )
        scale = max(1.0, op_norm(self.choi))
        minimum = _min_eigenvalue(self.choi.entries)
        if minimum < -CHOI_TOL * scale:
            raise NotPSDError(
                f"Channel is not completely positive: Choi min eigenvalue {minimum:.3e}"
            )
        if self.kraus is not None:
            rebuilt = choi_from_kraus(self.kraus, self.dim_in, self.dim_out)
            residual = float(np.max(np.abs(rebuilt.entries - self.choi.entries)))
            if residual > CHOI_TOL * scale:
                raise ValueError(f"Kraus operators disagree with Choi: {residual:.3e}")

    @classmethod
    def from_kraus(
        cls, kraus: Sequence[Any], dim_in: int, dim_out: int, name: str = "channel"
    ) -> "QChannel":
        operators = [np.asarray(k, dtype=complex) for k in kraus]
        return cls(
            dim_in=dim_in,
            dim_out=dim_out,
            kraus=operators,
            choi=choi_from_kraus(operators, dim_in, dim_out),
            name=name,
        )

    @classmethod
    def from_choi(
        cls, choi: OperatorLike, dim_in: int, dim_out: int, name: str = "channel"
    ) -> "QChannel":
        return cls(
            dim_in=dim_in,
            dim_out=dim_out,
            choi=HermitianOperator.from_matrix(as_matrix(choi)),
            name=name,
        )

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "QChannel":
        """Parse ``{"dim_in", "dim_out", "kraus": [...]}`` or ``{..., "choi": matrix}``."""
        try:
            dim_in, dim_out = int(data["dim_in"]), int(data["dim_out"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"Invalid channel object: {exc}") from exc

        if "kraus" in data:
            kraus = []
            for index, item in enumerate(data["kraus"]):
                # Kraus matrices are rectangular, so they carry rows/cols
                # instead of the square matrix schema's dim.
                rows = int(item.get("rows", item.get("dim", dim_out)))
                cols = int(item.get("cols", item.get("dim", dim_in)))
                pairs = item["entries"]
                if len(pairs) != rows * cols:
                    raise DimensionMismatchError(
                        f"Kraus operator {index}: expected {rows * cols} entries, "
                        f"got {len(pairs)}"
                    )
                values = np.array([complex(float(re), float(im)) for re, im in pairs])
                if not np.all(np.isfinite(values)):
                    raise ValueError(f"Kraus operator {index} has non-finite entries")
                kraus.append(values.reshape(rows, cols))
            return cls.from_kraus(kraus, dim_in, dim_out)
        if "choi" in data:
            choi = HermitianOperator.from_json_dict(data["choi"])
            return cls.from_choi(choi, dim_in, dim_out)
        raise ValueError("Channel object needs either 'kraus' or 'choi'")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "QChannel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "choi": self.choi.to_json_dict(),
        }

    @property
    def dim(self) -> int:
        """Dimension of the Choi matrix, dim_in·dim_out."""
        return self.dim_in * self.dim_out

    def is_trace_preserving(self, tol: float = CHOI_TOL) -> bool:
        marginal = partial_trace(self.choi, [self.dim_in, self.dim_out], [True, False])
        return bool(np.max(np.abs(marginal.entries - np.eye(self.dim_in))) <= tol)

    def apply(self, op: OperatorLike, dim_ref: int = 1) -> HermitianOperator:
        """(id_R ⊗ N)(W) for W on R⊗X."""
        return apply_channel(self, op, dim_ref)


def choi_from_kraus(
    kraus: Sequence[np.ndarray], dim_in: int, dim_out: int
) -> HermitianOperator:
    """J = Σ_k (I ⊗ K_k) Φ (I ⊗ K_k)†."""
    choi = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
    for index, k in enumerate(kraus):
        k = np.asarray(k, dtype=complex)
        if k.shape != (dim_out, dim_in):
            raise DimensionMismatchError(
                f"Kraus operator {index} has shape {k.shape}, "
                f"expected ({dim_out}, {dim_in})"
            )
        # (I ⊗ K)|Ω⟩ has entry K[y, x] at index (x, y).
        v = k.T.reshape(-1)
        choi += np.outer(v, v.conj())
    return HermitianOperator.from_matrix(choi)


def partial_trace(
    op: OperatorLike, dims: Sequence[int], keep_mask: Sequence[bool]
) -> HermitianOperator:
    """Trace out every subsystem whose keep_mask entry is False."""
    matrix = as_matrix(op)
    dims = list(dims)
    if len(keep_mask) != len(dims):
        raise DimensionMismatchError(
            f"keep_mask has {len(keep_mask)} entries for {len(dims)} subsystems"
        )
    _check_dims(matrix, dims)

    tensor = matrix.reshape(dims + dims)
    n = len(dims)
    for index in reversed(range(len(dims))):
        if not keep_mask[index]:
            tensor = np.trace(tensor, axis1=index, axis2=index + n)
            n -= 1
    kept = [d for d, keep in zip(dims, keep_mask) if keep]
    size = int(np.prod(kept)) if kept else 1
    return HermitianOperator.from_matrix(herm(tensor.reshape(size, size)))


def partial_transpose(
    op: OperatorLike, dims: Sequence[int], transpose_mask: Sequence[bool]
) -> HermitianOperator:
    """Transpose the subsystems flagged in transpose_mask."""
    matrix = as_matrix(op)
    dims = list(dims)
    if len(transpose_mask) != len(dims):
        raise DimensionMismatchError(
            f"transpose_mask has {len(transpose_mask)} entries "
            f"for {len(dims)} subsystems"
        )
    _check_dims(matrix, dims)

    n = len(dims)
    axes = list(range(2 * n))
    for index, flag in enumerate(transpose_mask):
        if flag:
            axes[index], axes[index + n] = axes[index + n], axes[index]
    tensor = matrix.reshape(dims + dims).transpose(axes)
    return HermitianOperator.from_matrix(tensor.reshape(matrix.shape))


def _eigen_clusters(
    sigma: OperatorLike, spec_tol: float = DEFAULT_SPEC_TOL
) -> List[np.ndarray]:
    """Eigenvector blocks of sigma, grouping eigenvalues closer than spec_tol·scale."""
    decomposition = eig(sigma)
    values = decomposition.eigenvalues
    vectors = decomposition.eigenvectors
    scale = max(float(np.max(np.abs(values))), 1e-300)

    clusters: List[np.ndarray] = []
    start = 0
    for index in range(1, len(values) + 1):
        if index == len(values) or values[index] - values[index - 1] > spec_tol * scale:
            clusters.append(vectors[:, start:index])
            start = index
    return clusters


def spec_count(sigma: OperatorLike, spec_tol: float = DEFAULT_SPEC_TOL) -> int:
    """Number of distinct eigenvalues |spec(σ)| up to spec_tol-relative clustering."""
    return len(_eigen_clusters(sigma, spec_tol))


def pinch(
    w: OperatorLike, sigma: OperatorLike, spec_tol: float = DEFAULT_SPEC_TOL
) -> HermitianOperator:
    """Pinching Σ_λ Π_λ W Π_λ over the eigenspaces of sigma."""
    matrix = as_matrix(w)
    if matrix.shape != as_matrix(sigma).shape:
        raise DimensionMismatchError(
            f"pinch: shapes {matrix.shape} and {as_matrix(sigma).shape} differ"
        )
    result = np.zeros_like(matrix)
    for block in _eigen_clusters(sigma, spec_tol):
        projector = block @ block.conj().T
        result += projector @ matrix @ projector
    return HermitianOperator.from_matrix(herm(result))


def pinched_spectra(
    w: OperatorLike, sigma: OperatorLike, spec_tol: float = DEFAULT_SPEC_TOL
) -> Tuple[np.ndarray, np.ndarray]:
    """Joint eigenvalues of pinch(W, σ) and σ in a common eigenbasis."""
    matrix = as_matrix(w)
    sigma_matrix = as_matrix(sigma)
    w_values: List[np.ndarray] = []
    s_values: List[np.ndarray] = []
    for block in _eigen_clusters(sigma, spec_tol):
        compressed = herm(block.conj().T @ matrix @ block)
        level = float(np.mean(np.real(np.diag(block.conj().T @ sigma_matrix @ block))))
        w_values.append(np.linalg.eigvalsh(compressed))
        s_values.append(np.full(block.shape[1], level))
    return np.concatenate(w_values), np.concatenate(s_values)


def apply_channel(
    channel: QChannel, op: OperatorLike, dim_ref: int = 1
) -> HermitianOperator:
    """(id_R ⊗ N)(W) = tr_X[(W^{T_X} ⊗ I_Y)(I_R ⊗ J)] for W on R⊗X."""
    matrix = as_matrix(op)
    dx, dy = channel.dim_in, channel.dim_out
    if matrix.shape[0] != dim_ref * dx:
        raise DimensionMismatchError(
            f"Input dim {matrix.shape[0]} does not match {dim_ref}x{dx}"
        )
    w = matrix.reshape(dim_ref, dx, dim_ref, dx)
    j = channel.choi.entries.reshape(dx, dy, dx, dy)
    out = np.einsum("aibj,icjd->acbd", w, j)
    size = dim_ref * dy
    return HermitianOperator.from_matrix(herm(out.reshape(size, size)))


def sandwich_choi(
    omega_x: OperatorLike, choi: OperatorLike, dim_out: int
) -> HermitianOperator:
    """ω_X^{1/2} J_XY ω_X^{1/2} (ω acting on the input system)."""
    root = np.kron(psd_power(as_matrix(omega_x), 0.5), np.eye(dim_out))
    return HermitianOperator.from_matrix(herm(root @ as_matrix(choi) @ root))


def _regroup_permutation(dim_in: int, dim_out: int, m: int) -> np.ndarray:
    """Index permutation taking (X1 Y1 X2 Y2 ...) to (X1..Xm Y1..Ym)."""
    shape = [dim_in, dim_out] * m
    axes = list(range(0, 2 * m, 2)) + list(range(1, 2 * m, 2))
    return np.arange(int(np.prod(shape))).reshape(shape).transpose(axes).reshape(-1)


def tensor_power(
    channel: QChannel, m: int, size_budget: int = DEFAULT_SIZE_BUDGET
) -> QChannel:
    """N^⊗m with the Choi matrix regrouped to (X^m)⊗(Y^m) ordering."""
    if m < 1:
        raise OutOfRangeError(f"tensor power m must be >= 1, got {m}")
    dimension = channel.dim**m
    if dimension > size_budget:
        raise SizeBudgetError(dimension, size_budget, what=f"Choi of N^⊗{m}")
    if m == 1:
        return channel

    choi = channel.choi.entries
    for _ in range(m - 1):
        choi = np.kron(choi, channel.choi.entries)
    perm = _regroup_permutation(channel.dim_in, channel.dim_out, m)
    regrouped = choi[np.ix_(perm, perm)]

    kraus = None
    if channel.kraus is not None and len(channel.kraus) ** m <= 64:
        kraus = list(channel.kraus)
        for _ in range(m - 1):
            kraus = [np.kron(a, b) for a in kraus for b in channel.kraus]

    return QChannel(
        dim_in=channel.dim_in**m,
        dim_out=channel.dim_out**m,
        choi=HermitianOperator.from_matrix(regrouped),
        kraus=kraus,
        name=f"{channel.name}^{m}",
    )


def tensor_product(
    first: QChannel, second: QChannel, size_budget: int = DEFAULT_SIZE_BUDGET
) -> QChannel:
    """N1⊗N2 with the Choi matrix regrouped to (X1 X2)⊗(Y1 Y2) ordering."""
    dimension = first.dim * second.dim
    if dimension > size_budget:
        raise SizeBudgetError(dimension, size_budget, what="Choi of N1⊗N2")
    shape = [first.dim_in, first.dim_out, second.dim_in, second.dim_out]
    perm = np.arange(dimension).reshape(shape).transpose([0, 2, 1, 3]).reshape(-1)
    choi = np.kron(first.choi.entries, second.choi.entries)
    return QChannel.from_choi(
        choi[np.ix_(perm, perm)],
        first.dim_in * second.dim_in,
        first.dim_out * second.dim_out,
        name=f"{first.name}*{second.name}",
    )


def classical_channel(transition: np.ndarray) -> QChannel:
    """Channel |x⟩⟨x| ↦ Σ_y W[y, x] |y⟩⟨y| for a column-stochastic W."""
    transition = np.asarray(transition, dtype=float)
    if transition.ndim != 2:
        raise DimensionMismatchError(
            f"W must be a matrix, got shape {transition.shape}"
        )
    if np.any(transition < 0):
        raise OutOfRangeError("transition probabilities must be nonnegative")
    dim_out, dim_in = transition.shape
    return QChannel.from_choi(
        np.diag(transition.T.reshape(-1)), dim_in, dim_out, name="classical"
    )


def amplitude_damping(gamma: float) -> QChannel:
    """Qubit amplitude damping with Kraus {|0⟩⟨0| + √(1−γ)|1⟩⟨1|, √γ|0⟩⟨1|}."""
    if not 0 <= gamma <= 1:
        raise OutOfRangeError(f"gamma must lie in [0, 1], got {gamma}")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]])
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]])
    return QChannel.from_kraus([k0, k1], 2, 2, name=f"ad:{gamma:g}")


def identity_channel(dim: int = 2) -> QChannel:
    if dim < 1:
        raise OutOfRangeError(f"dimension must be positive, got {dim}")
    return QChannel.from_kraus([np.eye(dim)], dim, dim, name=f"identity:{dim}")


def depolarizing(p: float, dim: int = 2) -> QChannel:
    """W ↦ (1−p) W + p tr(W) I/d."""
    if not 0 <= p <= 1:
        raise OutOfRangeError(f"depolarizing parameter must lie in [0, 1], got {p}")
    phi = np.zeros((dim * dim, dim * dim), dtype=complex)
    omega = np.eye(dim).reshape(-1)
    phi += np.outer(omega, omega)
    choi = (1 - p) * phi + p * np.eye(dim * dim) / dim
    return QChannel.from_choi(choi, dim, dim, name=f"depol:{p:g}")


def dephasing(p: float) -> QChannel:
    """Qubit dephasing W ↦ (1−p) W + p Z W Z."""
    if not 0 <= p <= 1:
        raise OutOfRangeError(f"dephasing parameter must lie in [0, 1], got {p}")
    kraus = [math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * np.diag([1.0, -1.0])]
    return QChannel.from_kraus(kraus, 2, 2, name=f"dephase:{p:g}")


def replacer(state: OperatorLike, dim_in: int) -> QChannel:
    """W ↦ tr(W) ρ, with Choi I_X ⊗ ρ."""
    rho = as_matrix(state)
    return QChannel.from_choi(
        np.kron(np.eye(dim_in), rho), dim_in, rho.shape[0], name="replacer"
    )


def entangled_pair(eps: float) -> Tuple["QState", "QState"]:
    """ρ = |φ_ε⟩⟨φ_ε| with |φ_ε⟩ = √ε|00⟩ + √(1−ε)|11⟩, and σ = I_X ⊗ tr_X ρ."""
    if not 0 < eps < 1:
        raise OutOfRangeError(f"epsilon must lie in (0, 1), got {eps}")
    phi = np.zeros(4)
    phi[0] = math.sqrt(eps)
    phi[3] = math.sqrt(1 - eps)
    rho = np.outer(phi, phi)
    sigma = np.kron(np.eye(2), np.diag([eps, 1 - eps]))
    return QState.from_matrix(rho, [2, 2]), QState.from_matrix(sigma, [2, 2])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_psd(
    dim: int, rng: np.random.Generator, rank: Optional[int] = None, real: bool = False
) -> np.ndarray:
    rank = rank or dim
    g = rng.normal(size=(dim, rank))
    if not real:
        g = g + 1j * rng.normal(size=(dim, rank))
    return herm(g @ g.conj().T).astype(complex)


def random_density(
    dim: int, rng: np.random.Generator, rank: Optional[int] = None, real: bool = False
) -> np.ndarray:
    rho = random_psd(dim, rng, rank, real)
    return rho / np.trace(rho).real


def random_channel(
    dim_in: int,
    dim_out: int,
    rng: np.random.Generator,
    n_kraus: int = 2,
    trace_preserving: bool = True,
) -> QChannel:
    """Random CP map; trace preserving via a random isometry when requested."""
    g = rng.normal(size=(n_kraus * dim_out, dim_in)) + 1j * rng.normal(
        size=(n_kraus * dim_out, dim_in)
    )
    if trace_preserving:
        q, _ = np.linalg.qr(g)
        g = q[:, :dim_in]
    kraus = [g[k * dim_out : (k + 1) * dim_out, :] for k in range(n_kraus)]
    return QChannel.from_kraus(kraus, dim_in, dim_out, name="random")
