"""Experiment configuration: a flat TOML file validated by pydantic."""
import logging
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from services.mild_solver import PicardConfig
from services.semigroup_ops import TimeGrid
from services.spectral_core import AlphaParam, Grid, Nonlinearity
from services.timestepper import StepConfig

logger = logging.getLogger(__name__)

SUITES = ("projectors", "smoothing", "mappings", "bilinear", "lipschitz", "energy", "h2",
          "higher-reg", "conditions", "alpha-limit", "all")
LA_DEFAULT_EXPONENT = 8.0


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment_id: str = Field("experiment", min_length=1)
    dim: Literal[2, 3] = 3
    points: int = Field(32, ge=8)
    alpha: float = Field(0.3, gt=0.0)
    nu: float = Field(0.1, gt=0.0)

    generator: Literal["taylor_green", "random_sobolev", "single_mode"] = "random_sobolev"
    regularity: float = 0.75
    amplitude: float = Field(0.1, ge=0.0)
    seed: int = 0
    wavevector: Optional[Tuple[int, ...]] = None
    component: int = 0

    horizon: float = Field(0.1, gt=0.0)
    dt: float = Field(0.001, gt=0.0)
    sampling: Literal["uniform", "log"] = "uniform"
    samples: int = Field(10, ge=2)
    solver: Literal["timestep", "picard", "both"] = "timestep"
    nonlinearity: Nonlinearity = "lans"
    dealias: bool = True
    norms: List[Tuple[float, float]] = Field(default_factory=list)

    picard_s1: float = 0.75
    picard_p: float = Field(2.0, gt=1.0)
    picard_s2: float = 1.0
    picard_c: float = Field(2.0, gt=1.0)
    picard_a: float = Field(0.125, ge=0.0)
    picard_aux_norm: Literal["weighted", "la"] = "weighted"
    picard_max_iterations: int = Field(50, ge=1)
    picard_tolerance: float = Field(1e-10, gt=0.0)

    suite: Optional[str] = None
    s1: float = 0.75
    s2: float = 1.0
    p: float = Field(2.0, gt=1.0)
    q: float = Field(4.0 / 3.0, gt=1.0)
    r: float = 2.0

    @field_validator("points")
    @classmethod
    def even_points(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"points must be even, got {value}")
        return value

    @field_validator("suite")
    @classmethod
    def known_suite(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in SUITES:
            raise ValueError(f"Unknown suite '{value}', expected one of {', '.join(SUITES)}")
        return value

    @model_validator(mode="after")
    def consistent_mode(self) -> "ExperimentConfig":
        if self.generator == "single_mode" and (self.wavevector is None or len(self.wavevector) != self.dim):
            raise ValueError("single_mode generator needs a wavevector with one entry per dimension")
        if self.picard_aux_norm == "la" and "picard_a" in self.model_fields_set and self.picard_a < 1:
            raise ValueError(f"The L^a auxiliary norm needs picard_a >= 1, got {self.picard_a}")
        if self.dt > self.horizon:
            raise ValueError(f"dt={self.dt} exceeds the horizon {self.horizon}")
        return self

    @property
    def grid(self) -> Grid:
        return Grid(self.dim, self.points)

    @property
    def params(self) -> AlphaParam:
        return AlphaParam(alpha=self.alpha, nu=self.nu)

    def sample_grid(self) -> TimeGrid:
        if self.sampling == "log":
            return TimeGrid.log_graded(self.horizon, self.samples)
        return TimeGrid.uniform(self.horizon, self.samples)

    def step_config(self) -> StepConfig:
        return StepConfig(dt=self.dt, dealias=self.dealias, nonlinearity=self.nonlinearity)

    def _picard_exponent(self) -> float:
        # unset a with the L^a norm means the L^8 preset
        if self.picard_aux_norm == "la" and "picard_a" not in self.model_fields_set:
            return LA_DEFAULT_EXPONENT
        return self.picard_a

    def picard_config(self) -> PicardConfig:
        return PicardConfig(
            s1=self.picard_s1, p=self.picard_p, s2=self.picard_s2, c=self.picard_c, a=self._picard_exponent(),
            aux_norm=self.picard_aux_norm, horizon=self.horizon, time_steps=self.samples,
            spacing=self.sampling, max_iterations=self.picard_max_iterations,
            tolerance=self.picard_tolerance, nonlinearity=self.nonlinearity,
        )

    def norm_pairs(self) -> List[Tuple[float, float]]:
        defaults = [(0.0, 2.0), (1.0, 2.0), (2.0, 2.0), (3.0, 2.0)]
        return defaults + [pair for pair in self.norms if tuple(pair) not in defaults]


def load_config(path: str = None, overrides: Dict[str, Any] = None) -> ExperimentConfig:
    """Read a flat TOML file (optional) and apply overrides; None-valued overrides are ignored."""
    values: Dict[str, Any] = {}
    if path:
        try:
            with open(Path(path), "rb") as f:
                values = tomllib.load(f)
        except (OSError, tomllib.TOMLDecodeError) as e:
            logger.error(f"Failed to read config {path}: {e}")
            raise
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    config = ExperimentConfig.model_validate(values)
    logger.debug(f"Loaded experiment config: {config.model_dump()}")
    return config
