"""Tests for configuration loading and run validation."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from renyi_sharp.config import (
    ALPHA_MARGIN,
    Config,
    RunConfig,
    SolverConfig,
    load_config,
)

REPO_CONFIG = Path(__file__).resolve().parents[2] / "config.yaml"


class TestConfig:
    """Test cases for the YAML configuration."""

    def test_defaults_without_file(self, tmp_path: Path, monkeypatch) -> None:
        monkeypatch.chdir(tmp_path)
        config = load_config()
        assert config.solver == SolverConfig()
        assert config.presets == {}

    def test_missing_explicit_file(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "missing.yaml")

    def test_repository_presets(self) -> None:
        config = Config.from_yaml(REPO_CONFIG)
        assert config.solver.tol == 1e-8
        capacity = config.preset("ad-capacity")
        assert len(capacity.alphas) == 10
        assert capacity.gammas[3] == 0.5
        assert config.preset("ad-capacity-copies").m == 3
        assert config.preset("entangled-eps").bits == 10

    def test_unknown_preset(self) -> None:
        with pytest.raises(KeyError):
            Config().preset("missing")

    def test_empty_file(self, tmp_path: Path) -> None:
        path = tmp_path / "config.yaml"
        path.write_text("")
        assert Config.from_yaml(path).solver.bits == 8

    def test_invalid_solver_values(self, tmp_path: Path) -> None:
        path = tmp_path / "config.yaml"
        path.write_text("solver:\n  bits: 20\n")
        with pytest.raises(ValidationError):
            Config.from_yaml(path)

    def test_preset_alphas_validated(self) -> None:
        with pytest.raises(ValidationError):
            Config(presets={"bad": {"alphas": [1.0]}})


class TestRunConfig:
    """Test cases for per-invocation validation."""

    def test_alpha_margin(self) -> None:
        assert RunConfig(alphas=[1 + 2 * ALPHA_MARGIN]).alphas
        with pytest.raises(ValidationError):
            RunConfig(alphas=[1 + ALPHA_MARGIN / 2])

    @pytest.mark.parametrize(
        "values",
        [
            {"gammas": [1.2]},
            {"m": [0]},
            {"epsilon": 1.0},
            {"tol": 1e-2},
            {"bits": 1},
            {"jobs": 0},
        ],
    )
    def test_rejects(self, values: dict) -> None:
        with pytest.raises(ValidationError):
            RunConfig(**values)

    def test_solver_config_overlays_base(self) -> None:
        base = SolverConfig(step_fraction=0.9)
        options = RunConfig(bits=10, tol=1e-7).solver_config(base)
        assert options.bits == 10
        assert options.tol == 1e-7
        assert options.step_fraction == 0.9
