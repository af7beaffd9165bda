"""Plain-text dump of a ConicProgram, one pairing per line.

See docs/sdp-dump-format.md for the format.
"""

import logging
from pathlib import Path
from typing import IO, Iterator, Union

import numpy as np

from .program import ConicProgram, smat

logger = logging.getLogger(__name__)

FORMAT_HEADER = "# renyi-sharp sdp dump v1"


def _entries(coords: np.ndarray, dim: int, tol: float) -> Iterator[tuple]:
    matrix = smat(coords, dim)
    for i in range(dim):
        for j in range(i, dim):
            value = matrix[i, j]
            if abs(value) > tol:
                yield i, j, value.real, value.imag


def iter_dump_lines(program: ConicProgram, tol: float = 0.0) -> Iterator[str]:
    """Lines of the dump; matrices are written as upper-triangle entries."""
    yield FORMAT_HEADER
    yield f"name {program.name}"
    yield f"blocks {len(program.blocks)}"
    for index, block in enumerate(program.blocks):
        yield f"block {index} {block.name} {block.dim}"
    yield f"rows {program.num_rows}"

    for index, (block, objective) in enumerate(zip(program.blocks, program.objective)):
        for i, j, re, im in _entries(objective, block.dim, tol):
            yield f"obj {index} {i} {j} {re:.17g} {im:.17g}"

    for index, (block, rows) in enumerate(zip(program.blocks, program.rows)):
        for row in np.flatnonzero(rows.getnnz(axis=1)):
            coords = rows[row].toarray().ravel()
            for i, j, re, im in _entries(coords, block.dim, tol):
                yield f"con {row} {index} {i} {j} {re:.17g} {im:.17g}"

    for row, value in enumerate(program.rhs):
        if value != 0:
            yield f"rhs {row} {value:.17g}"
    yield f"offset {program.objective_offset:.17g}"


def write_dump(program: ConicProgram, stream: IO[str], tol: float = 0.0) -> int:
    count = 0
    for line in iter_dump_lines(program, tol):
        stream.write(line + "\n")
        count += 1
    return count


def dump_program(
    program: ConicProgram, path: Union[str, Path], tol: float = 0.0
) -> Path:
    """Write the dump of program to path and return the path."""
    path = Path(path)
    with open(path, "w") as f:
        count = write_dump(program, f, tol)
    logger.info(f"Wrote {count} lines for '{program.name}' to {path}")
    return path
