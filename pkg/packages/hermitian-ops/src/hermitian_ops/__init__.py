from .operator import (
    DEFAULT_HERM_TOL,
    DEFAULT_RANK_TOL,
    DimensionMismatchError,
    HermitianOperator,
    NonHermitianError,
    NotPSDError,
    OperatorLike,
    SpectralDecomposition,
    as_matrix,
    as_operator,
    eig,
    kron,
    matrix_power,
    op_norm,
    psd_power,
    subset_check,
    support_basis,
    support_projector,
    trace,
)

__all__ = [
    "DEFAULT_HERM_TOL",
    "DEFAULT_RANK_TOL",
    "DimensionMismatchError",
    "HermitianOperator",
    "NonHermitianError",
    "NotPSDError",
    "OperatorLike",
    "SpectralDecomposition",
    "as_matrix",
    "as_operator",
    "eig",
    "kron",
    "matrix_power",
    "op_norm",
    "psd_power",
    "subset_check",
    "support_basis",
    "support_projector",
    "trace",
]
