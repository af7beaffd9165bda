"""Hermitian semidefinite programs: modeling layer, solver and debug dump."""

from .dump import dump_program, iter_dump_lines, write_dump
from .program import (
    AffineExpr,
    BlockSpec,
    Composed,
    ConicProgram,
    Identity,
    LinearMap,
    PartialTrace,
    PartialTranspose,
    ProgramBuilder,
    ScalarEmbed,
    Scaled,
    Sandwich,
    Trace,
    block_selector,
    evaluate,
    hermitian_basis,
    hvec,
    smat,
)
from .solver import (
    CertificateCheck,
    ConicSolution,
    check_certificate,
    derealify_matrix,
    is_conjugation_invariant,
    realify,
    realify_matrix,
    solve,
)

__all__ = [
    "AffineExpr",
    "BlockSpec",
    "CertificateCheck",
    "Composed",
    "ConicProgram",
    "ConicSolution",
    "Identity",
    "LinearMap",
    "PartialTrace",
    "PartialTranspose",
    "ProgramBuilder",
    "Sandwich",
    "ScalarEmbed",
    "Scaled",
    "Trace",
    "block_selector",
    "check_certificate",
    "derealify_matrix",
    "dump_program",
    "evaluate",
    "hermitian_basis",
    "hvec",
    "is_conjugation_invariant",
    "iter_dump_lines",
    "realify",
    "realify_matrix",
    "smat",
    "solve",
    "write_dump",
]
