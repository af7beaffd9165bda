"""CLI for Hermitian matrix utilities."""

import json
from enum import Enum
from pathlib import Path
from typing import Callable, Dict

import numpy as np
import typer

from .operator import (
    HermitianOperator,
    NotPSDError,
    eig,
    matrix_power,
    op_norm,
    support_basis,
)

app = typer.Typer(
    name="hermitian-ops",
    help="Hermitian matrix inspection utilities for the shared JSON matrix format",
    add_completion=False,
)


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


def _load_matrix(path: str) -> HermitianOperator:
    try:
        return HermitianOperator.from_json(Path(path).read_text())
    except (OSError, ValueError) as exc:
        typer.echo(f"Failed to load matrix '{path}': {exc}", err=True)
        raise typer.Exit(2) from exc


@app.command("eig")
def eig_command(
    path: str = typer.Argument(..., help="Matrix JSON file"),
    output: OutputFormat = typer.Option(
        OutputFormat.TEXT,
        "--output",
        "-o",
        help="Output format",
    ),
) -> None:
    """Print the eigenvalues in ascending order."""
    eigenvalues = eig(_load_matrix(path)).eigenvalues
    if output is OutputFormat.JSON:
        typer.echo(json.dumps({"eigenvalues": [float(v) for v in eigenvalues]}))
        return

    typer.echo(" ".join(f"{v:.15g}" for v in eigenvalues))


@app.command()
def power(
    path: str = typer.Argument(..., help="Matrix JSON file"),
    exponent: float = typer.Argument(..., help="Real exponent p"),
) -> None:
    """Print H^p (generalized inverse on the support for p < 0) as matrix JSON."""
    try:
        result = matrix_power(_load_matrix(path), exponent)
    except NotPSDError as exc:
        typer.echo(str(exc), err=True)
        raise typer.Exit(2) from exc
    typer.echo(result.to_json())


@app.command()
def check(
    path: str = typer.Argument(..., help="Matrix JSON file"),
    check_name: str = typer.Argument(
        ...,
        help="Property to check: is-psd, is-pd, is-diagonal, is-real, is-projector",
    ),
) -> None:
    """Check a matrix property using shell-friendly exit codes."""
    operator = _load_matrix(path)
    matrix = operator.entries
    scale = max(1.0, op_norm(operator))

    def is_psd() -> bool:
        return bool(eig(operator).eigenvalues[0] >= -1e-10 * scale)

    def is_pd() -> bool:
        return support_basis(operator).shape[1] == operator.dim and is_psd()

    def is_diagonal() -> bool:
        return bool(np.allclose(matrix, np.diag(np.diag(matrix)), atol=1e-12 * scale))

    def is_projector() -> bool:
        return bool(np.allclose(matrix @ matrix, matrix, atol=1e-9))

    property_map: Dict[str, Callable[[], bool]] = {
        "is-psd": is_psd,
        "is-pd": is_pd,
        "is-diagonal": is_diagonal,
        "is-real": operator.is_real,
        "is-projector": is_projector,
    }

    if check_name not in property_map:
        typer.echo(f"Invalid check: {check_name}", err=True)
        typer.echo(f"Valid checks: {', '.join(sorted(property_map))}", err=True)
        raise typer.Exit(2)

    raise typer.Exit(0 if property_map[check_name]() else 1)
