"""Configuration management for renyi-sharp."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, Field, field_validator

# Alphas closer to 1 than this are rejected by every divergence command.
ALPHA_MARGIN = 1e-6


def validate_alphas(values: List[float]) -> List[float]:
    """Reject alphas that are not strictly above one."""
    for alpha in values:
        if alpha <= 1 + ALPHA_MARGIN:
            raise ValueError(f"alpha must exceed 1 + {ALPHA_MARGIN}, got {alpha}")
    return values


class SolverConfig(BaseModel):
    """Interior-point and dyadic-bracket settings shared by all programs."""

    tol: float = Field(default=1e-8, ge=1e-10, le=1e-4)
    max_iter: int = Field(default=200, ge=1)
    bits: int = Field(default=8, ge=2, le=14)
    size_budget: int = Field(default=1200, ge=1)
    exploit_real: bool = True
    step_fraction: float = Field(default=0.98, gt=0, lt=1)
    regularization: float = Field(default=1e-10, ge=0)
    dump_dir: Optional[Path] = None


class Preset(BaseModel):
    """Named reproduction run."""

    description: Optional[str] = None
    alphas: List[float] = Field(default_factory=list)
    epsilons: List[float] = Field(default_factory=list)
    gammas: List[float] = Field(default_factory=list)
    bits: Optional[int] = Field(default=None, ge=2, le=14)
    m: int = Field(default=1, ge=1)

    _validate_alphas = field_validator("alphas")(validate_alphas)


class Config(BaseModel):
    """Root configuration model."""

    version: int = 1
    solver: SolverConfig = Field(default_factory=SolverConfig)
    presets: Dict[str, Preset] = Field(default_factory=dict)

    @classmethod
    def from_yaml(cls, path: Union[str, Path] = "config.yaml") -> "Config":
        """Load configuration from YAML file."""
        config_path = Path(path)
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        with open(config_path, "r") as f:
            data = yaml.safe_load(f) or {}

        return cls(**data)

    def preset(self, name: str) -> Preset:
        if name not in self.presets:
            available = ", ".join(sorted(self.presets)) or "none"
            raise KeyError(f"Unknown preset '{name}'. Available: {available}")
        return self.presets[name]


def load_config(path: Optional[Union[str, Path]] = None) -> Config:
    """Load configuration from YAML file.

    Args:
        path: Path to config file. When omitted, config.yaml in the current
            directory is used if present, otherwise built-in defaults.

    Returns:
        Loaded configuration object
    """
    if path is None:
        if not Path("config.yaml").exists():
            return Config()
        path = "config.yaml"
    return Config.from_yaml(path)


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    alphas: List[float] = Field(default_factory=list)
    bits: int = Field(default=8, ge=2, le=14)
    tol: float = Field(default=1e-8, ge=1e-10, le=1e-4)
    max_iter: int = Field(default=200, ge=1)
    m: List[int] = Field(default_factory=lambda: [1])
    gammas: List[float] = Field(default_factory=list)
    epsilon: float = Field(default=0.0, ge=0, lt=1)
    n: int = Field(default=1, ge=1)
    jobs: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    size_budget: int = Field(default=1200, ge=1)
    output_path: Optional[str] = None
    dump_dir: Optional[str] = None

    _validate_alphas = field_validator("alphas")(validate_alphas)

    @field_validator("gammas")
    @classmethod
    def _gammas_in_unit_interval(cls, v: List[float]) -> List[float]:
        for gamma in v:
            if not 0 <= gamma <= 1:
                raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
        return v

    @field_validator("m")
    @classmethod
    def _positive_m(cls, v: List[int]) -> List[int]:
        if any(m < 1 for m in v):
            raise ValueError(f"tensor power m must be >= 1, got {v}")
        return v

    def solver_config(self, base: Optional[SolverConfig] = None) -> SolverConfig:
        """Overlay the command-line solver knobs on the configured defaults."""
        base = base or SolverConfig()
        update: Dict[str, Any] = {
            "bits": self.bits,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "size_budget": self.size_budget,
        }
        if self.dump_dir is not None:
            update["dump_dir"] = Path(self.dump_dir)
        return base.model_copy(update=update)
