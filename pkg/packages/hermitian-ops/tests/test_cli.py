import json
from pathlib import Path

import numpy as np
from typer.testing import CliRunner

from hermitian_ops import HermitianOperator
from hermitian_ops.cli import app

runner = CliRunner()


def write_matrix(tmp_path: Path, name: str, op: HermitianOperator) -> str:
    path = tmp_path / name
    path.write_text(op.to_json())
    return str(path)


def test_eig_json(tmp_path: Path) -> None:
    pauli_x = HermitianOperator.from_matrix([[0, 1], [1, 0]])
    path = write_matrix(tmp_path, "x.json", pauli_x)
    result = runner.invoke(app, ["eig", path, "--output", "json"])

    assert result.exit_code == 0
    assert json.loads(result.stdout)["eigenvalues"] == [-1.0, 1.0]


def test_power_prints_matrix_json(tmp_path: Path) -> None:
    path = write_matrix(tmp_path, "d.json", HermitianOperator.diag([4, 9]))
    result = runner.invoke(app, ["power", path, "0.5"])

    assert result.exit_code == 0
    parsed = HermitianOperator.from_json(result.stdout)
    assert np.allclose(parsed.entries, np.diag([2, 3]))


def test_check_uses_shell_exit_codes(tmp_path: Path) -> None:
    psd = write_matrix(tmp_path, "psd.json", HermitianOperator.diag([1, 0]))
    indefinite = write_matrix(tmp_path, "ind.json", HermitianOperator.diag([1, -1]))

    assert runner.invoke(app, ["check", psd, "is-psd"]).exit_code == 0
    assert runner.invoke(app, ["check", psd, "is-pd"]).exit_code == 1
    assert runner.invoke(app, ["check", indefinite, "is-psd"]).exit_code == 1
    assert runner.invoke(app, ["check", psd, "is-projector"]).exit_code == 0
    assert runner.invoke(app, ["check", psd, "unknown"]).exit_code == 2


def test_load_failure_exits_with_two(tmp_path: Path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "entries": [[1, 0]]}))
    result = runner.invoke(app, ["eig", str(bad)])

    assert result.exit_code == 2
    assert "Failed to load matrix" in result.stderr
