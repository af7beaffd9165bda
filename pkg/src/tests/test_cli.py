"""Tests for the renyi-sharp command-line interface."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Dict, List

import numpy as np
import pytest
from typer.testing import CliRunner

from hermitian_ops import HermitianOperator
from renyi_sharp.cli import EXIT_BUDGET, EXIT_ERROR, EXIT_PARTIAL, app
from renyi_sharp.divergence import d_classical

runner = CliRunner()


def write_state(tmp_path: Path, name: str, matrix: np.ndarray) -> str:
    path = tmp_path / name
    path.write_text(HermitianOperator.from_matrix(matrix).to_json())
    return str(path)


def csv_rows(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


class TestStateDiv:
    """Test cases for the state-div command."""

    def test_entangled_family_csv(self) -> None:
        result = runner.invoke(
            app, ["state-div", "--family", "entangled", "--eps", "1e-3", "--alpha", "2"]
        )
        assert result.exit_code == 0, result.output
        rows = csv_rows(result.stdout)
        assert len(rows) == 1
        assert list(rows[0])[:3] == ["eps", "alpha", "D_sharp_lo"]
        assert float(rows[0]["D_sharp_hi"]) == pytest.approx(0.362157, abs=5e-3)
        assert float(rows[0]["D_sandwiched"]) == pytest.approx(0.088432, abs=1e-6)
        assert rows[0]["status"] == "optimal"

    def test_state_files_json(self, tmp_path: Path) -> None:
        p, q = np.array([0.6, 0.4]), np.array([0.25, 0.75])
        rho = write_state(tmp_path, "rho.json", np.diag(p))
        sigma = write_state(tmp_path, "sigma.json", np.diag(q))
        result = runner.invoke(
            app, ["state-div", rho, sigma, "--alphas", "2,4", "--json"]
        )
        assert result.exit_code == 0, result.output
        rows = json.loads(result.stdout)
        assert [row["alpha"] for row in rows] == [2.0, 4.0]
        for row in rows:
            expected = d_classical(p, q, row["alpha"])
            assert row["D_sharp_hi"] == pytest.approx(expected, abs=1e-4)
            assert row["D_sharp_lo"] == pytest.approx(row["D_sharp_hi"])

    def test_infinite_value_is_reported(self, tmp_path: Path) -> None:
        rho = write_state(tmp_path, "rho.json", np.eye(2) / 2)
        sigma = write_state(tmp_path, "sigma.json", np.diag([1.0, 0.0]))
        result = runner.invoke(app, ["state-div", rho, sigma, "--alpha", "2"])
        assert result.exit_code == 0, result.output
        row = csv_rows(result.stdout)[0]
        assert row["D_sharp_hi"] == "inf"
        assert row["status"] == "infinite"

    def test_dimension_mismatch_exits_1(self, tmp_path: Path) -> None:
        rho = write_state(tmp_path, "rho.json", np.eye(2) / 2)
        sigma = write_state(tmp_path, "sigma.json", np.eye(3) / 3)
        result = runner.invoke(app, ["state-div", rho, sigma, "--alpha", "2"])
        assert result.exit_code == EXIT_ERROR

    def test_missing_file_exits_1(self, tmp_path: Path) -> None:
        rho = write_state(tmp_path, "rho.json", np.eye(2) / 2)
        result = runner.invoke(
            app, ["state-div", rho, str(tmp_path / "nope.json"), "--alpha", "2"]
        )
        assert result.exit_code == EXIT_ERROR

    def test_non_psd_state_exits_1(self, tmp_path: Path) -> None:
        rho = write_state(tmp_path, "rho.json", np.diag([1.5, -0.5]))
        sigma = write_state(tmp_path, "sigma.json", np.eye(2) / 2)
        result = runner.invoke(app, ["state-div", rho, sigma, "--alpha", "2"])
        assert result.exit_code == EXIT_ERROR

    def test_alpha_at_one_exits_1(self) -> None:
        result = runner.invoke(
            app, ["state-div", "--family", "entangled", "--eps", "0.1", "--alpha", "1"]
        )
        assert result.exit_code == EXIT_ERROR

    def test_invalid_format_exits_1(self) -> None:
        result = runner.invoke(
            app,
            ["state-div", "--family", "entangled", "--eps", "0.1", "--alpha", "2"]
            + ["--format", "xml"],
        )
        assert result.exit_code == EXIT_ERROR

    def test_solver_failure_gives_partial_rows(self) -> None:
        result = runner.invoke(
            app,
            ["state-div", "--family", "entangled", "--eps", "0.1", "--alpha", "2"]
            + ["--max-iter", "1", "--jobs", "1"],
        )
        assert result.exit_code == EXIT_PARTIAL
        row = csv_rows(result.stdout)[0]
        assert row["status"] == "failed"
        assert row["D_sharp_hi"] == ""

    def test_out_file(self, tmp_path: Path) -> None:
        out = tmp_path / "rows.csv"
        result = runner.invoke(
            app,
            ["state-div", "--family", "entangled", "--eps", "0.1", "--alpha", "2"]
            + ["--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert result.stdout == ""
        assert len(csv_rows(out.read_text())) == 1

    def test_preset_from_config(self, tmp_path: Path) -> None:
        config = tmp_path / "config.yaml"
        config.write_text(
            "version: 1\n"
            "presets:\n"
            "  spot:\n"
            "    alphas: [2.0]\n"
            "    epsilons: [0.001, 0.1]\n"
        )
        result = runner.invoke(
            app, ["state-div", "--preset", "spot", "--config", str(config)]
        )
        assert result.exit_code == 0, result.output
        rows = csv_rows(result.stdout)
        assert [float(row["eps"]) for row in rows] == [0.001, 0.1]

    def test_unknown_preset_exits_1(self, tmp_path: Path) -> None:
        config = tmp_path / "config.yaml"
        config.write_text("version: 1\n")
        result = runner.invoke(
            app, ["state-div", "--preset", "nope", "--config", str(config)]
        )
        assert result.exit_code == EXIT_ERROR


class TestChannelCommands:
    """Test cases for channel-div, hierarchy, discrim and rate-bound."""

    def test_channel_div_identical(self) -> None:
        result = runner.invoke(
            app, ["channel-div", "ad:0.3", "ad:0.3", "--alpha", "2", "--json"]
        )
        assert result.exit_code == 0, result.output
        row = json.loads(result.stdout)[0]
        assert row["m"] == 1
        assert row["D_sharp_hi"] == pytest.approx(0.0, abs=1e-5)
        assert row["D_sandwiched_lower"] <= row["D_sharp_hi"] + 1e-5

    def test_channel_div_unknown_channel(self) -> None:
        result = runner.invoke(app, ["channel-div", "foo:1", "ad:0.3", "--alpha", "2"])
        assert result.exit_code == EXIT_ERROR

    def test_channel_div_budget_exits_3(self) -> None:
        result = runner.invoke(
            app,
            ["channel-div", "ad:0.3", "ad:0.5", "--alpha", "2", "--m", "3"]
            + ["--size-budget", "32", "--jobs", "1"],
        )
        assert result.exit_code == EXIT_BUDGET

    def test_hierarchy_with_delta(self) -> None:
        result = runner.invoke(
            app,
            ["hierarchy", "ad:0.3", "ad:0.3", "--alpha", "2", "--delta", "10"]
            + ["--json"],
        )
        assert result.exit_code == 0, result.output
        row = json.loads(result.stdout)[0]
        assert row["upper"] == pytest.approx(0.0, abs=1e-4)
        assert row["copies_for_delta"] == 18

    def test_discrim(self) -> None:
        result = runner.invoke(
            app,
            ["discrim", "ad:0.3", "ad:0.3", "--rates", "0.5,1", "--alpha", "2"]
            + ["--json", "--jobs", "1"],
        )
        assert result.exit_code == 0, result.output
        rows = json.loads(result.stdout)
        assert [row["exponent"] for row in rows] == pytest.approx(
            [0.25, 0.5], abs=1e-4
        )
        assert [row["status"] for row in rows] == ["ok", "ok"]
        assert all(row["failed_alphas"] == "" for row in rows)

    def test_discrim_failed_cells_exit_partial(self) -> None:
        result = runner.invoke(
            app,
            ["discrim", "ad:0.3", "ad:0.5", "--rates", "0.5,1", "--alpha", "2"]
            + ["--max-iter", "1", "--jobs", "1"],
        )
        assert result.exit_code == EXIT_PARTIAL
        rows = csv_rows(result.stdout)
        assert [row["status"] for row in rows] == ["failed", "failed"]
        assert all(row["failed_alphas"] == "2" for row in rows)
        assert all(row["exponent"] == "nan" for row in rows)

    def test_rate_bound(self) -> None:
        result = runner.invoke(
            app,
            ["rate-bound", "ad:0", "--epsilon", "0.5", "--n", "4", "--alpha", "2"]
            + ["--json"],
        )
        assert result.exit_code == 0, result.output
        row = json.loads(result.stdout)[0]
        assert row["correction"] == pytest.approx(0.5)
        assert row["bound"] == pytest.approx(1.5, abs=1e-3)
        assert row["status"] == "ok"

    def test_rate_bound_failed_cell_exit_partial(self) -> None:
        result = runner.invoke(
            app,
            ["rate-bound", "ad:0.5", "--epsilon", "0.1", "--n", "4", "--alpha", "2"]
            + ["--max-iter", "1", "--jobs", "1"],
        )
        assert result.exit_code == EXIT_PARTIAL
        row = csv_rows(result.stdout)[0]
        assert row["status"] == "failed"
        assert row["failed_alphas"] == "2"


class TestCapacityCommand:
    """Test cases for the capacity command."""

    def test_max_rains(self) -> None:
        result = runner.invoke(
            app, ["capacity", "--bound", "dmax", "--gammas", "0.3,0.5", "--json"]
        )
        assert result.exit_code == 0, result.output
        rows = json.loads(result.stdout)
        assert [row["bound"] for row in rows] == pytest.approx(
            [math.log2(1.7), math.log2(1.5)], abs=1e-3
        )

    def test_single_alpha(self) -> None:
        result = runner.invoke(
            app, ["capacity", "--gammas", "0.5", "--alpha", "2", "--jobs", "1"]
        )
        assert result.exit_code == 0, result.output
        row = csv_rows(result.stdout)[0]
        assert float(row["best_alpha"]) == 2.0
        assert float(row["bound"]) <= math.log2(1.5) + 1e-3
        assert row["failed_alphas"] == ""

    def test_unknown_family(self) -> None:
        result = runner.invoke(
            app, ["capacity", "--channel", "erasure", "--gammas", "0.5", "--alpha", "2"]
        )
        assert result.exit_code == EXIT_ERROR

    def test_unknown_bound(self) -> None:
        result = runner.invoke(
            app, ["capacity", "--bound", "rains", "--gammas", "0.5", "--alpha", "2"]
        )
        assert result.exit_code == EXIT_ERROR

    def test_gamma_out_of_range(self) -> None:
        result = runner.invoke(app, ["capacity", "--gammas", "1.5", "--alpha", "2"])
        assert result.exit_code == EXIT_ERROR

    def test_budget_exits_3(self) -> None:
        result = runner.invoke(
            app,
            ["capacity", "--gammas", "0.5", "--alpha", "2", "--size-budget", "4"]
            + ["--jobs", "1"],
        )
        assert result.exit_code == EXIT_BUDGET

    @pytest.mark.slow
    def test_ad_capacity_rows(self) -> None:
        result = runner.invoke(
            app, ["capacity", "--gammas", "0,0.5,1", "--alphas", "1.1:2.0:0.1"]
        )
        assert result.exit_code == 0, result.output
        bounds = [float(row["bound"]) for row in csv_rows(result.stdout)]
        assert bounds == pytest.approx([1.0, 0.5485, 0.0], abs=1e-2)


class TestSelftestCommand:
    """Test cases for the selftest command."""

    def test_report_is_deterministic(self) -> None:
        args = ["selftest", "--suite", "commuting", "--count", "2", "--seed", "7"]
        first = runner.invoke(app, args)
        second = runner.invoke(app, args)
        assert first.exit_code == 0, first.output
        assert first.stdout == second.stdout
        report = json.loads(first.stdout)
        assert report["seed"] == 7
        assert [suite["name"] for suite in report["suites"]] == ["commuting"]

    def test_unknown_suite_exits_1(self) -> None:
        result = runner.invoke(app, ["selftest", "--suite", "nope"])
        assert result.exit_code == EXIT_ERROR


class TestDumpOption:
    """Test cases for --dump."""

    def test_state_div_writes_one_dump_per_solve(self, tmp_path: Path) -> None:
        dumps = tmp_path / "dumps"
        result = runner.invoke(
            app,
            ["state-div", "--family", "entangled", "--eps", "0.1", "--alpha", "2"]
            + ["--jobs", "1", "--dump", str(dumps)],
        )
        assert result.exit_code == 0, result.output
        files = sorted(dumps.glob("*.sdp"))
        assert len(files) == 1
        lines = files[0].read_text().splitlines()
        assert lines[0] == "# renyi-sharp sdp dump v1"
        assert lines[1].startswith("name state-div alpha=2")

    def test_rate_bound_dumps_capacity_and_diamond_programs(
        self, tmp_path: Path
    ) -> None:
        dumps = tmp_path / "dumps"
        result = runner.invoke(
            app,
            ["rate-bound", "ad:0.5", "--epsilon", "0.1", "--n", "4", "--alpha", "2"]
            + ["--jobs", "1", "--dump", str(dumps)],
        )
        assert result.exit_code == 0, result.output
        names = [path.name for path in sorted(dumps.glob("*.sdp"))]
        assert any("capacity" in name for name in names)
        assert any(name.endswith("-diamond.sdp") for name in names)

    def test_no_dump_by_default(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.chdir(tmp_path)
        result = runner.invoke(
            app, ["state-div", "--family", "entangled", "--eps", "0.1", "--alpha", "2"]
        )
        assert result.exit_code == 0, result.output
        assert list(tmp_path.rglob("*.sdp")) == []
