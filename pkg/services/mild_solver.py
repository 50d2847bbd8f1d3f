"""Mild formulation of LANS-α and its Picard fixed-point solver.

u = Γφ - G P^α V^α(u, u) is iterated from u⁰ = Γφ; the iteration is measured
in the E-norm sup_t‖·‖_{s1,p} + (auxiliary time norm in H^{s2,c}).
"""
import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from services.semigroup_ops import (
    LaNormSpec,
    TimeGrid,
    Trajectory,
    WeightedNormSpec,
    duhamel,
    gamma,
    la_time_norm,
    weighted_time_norm,
)
from services.spectral_core import (
    AlphaParam,
    Nonlinearity,
    SpectralField,
    projected_nonlinearity,
    require_divergence_free,
)

logger = logging.getLogger(__name__)

OVERFLOW_LIMIT = 1e12
NON_CONTRACTION_PATIENCE = 3
MEAN_MODE_TOL = 1e-12


class PicardError(Exception):
    """Base class for fixed-point failures; carries the diagnostics gathered so far."""

    def __init__(self, message: str, diagnostics: "PicardDiagnostics" = None):
        super().__init__(message)
        self.diagnostics = diagnostics


class NonContractionError(PicardError):
    pass


class PicardDivergenceError(PicardError):
    pass


class PicardConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    s1: float = Field(0.75, description="Regularity r of the sup-in-time component")
    p: float = Field(2.0, gt=1.0)
    s2: float = Field(1.0, description="Regularity k of the auxiliary component")
    c: float = Field(2.0, gt=1.0)
    a: float = Field(0.125, ge=0.0, description="Time weight exponent, or L^a exponent")
    aux_norm: Literal["weighted", "la"] = "weighted"
    horizon: float = Field(0.1, gt=0.0)
    time_steps: int = Field(40, ge=2)
    spacing: Literal["log", "uniform"] = "log"
    max_iterations: int = Field(50, ge=1)
    tolerance: float = Field(1e-10, gt=0.0)
    nonlinearity: Nonlinearity = "lans"

    @field_validator("horizon", "tolerance")
    @classmethod
    def finite(cls, value: float, info) -> float:
        if not np.isfinite(value):
            raise ValueError(f"{info.field_name} must be finite")
        return value

    @model_validator(mode="after")
    def la_exponent_at_least_one(self) -> "PicardConfig":
        if self.aux_norm == "la" and self.a < 1:
            raise ValueError("The L^a auxiliary norm needs a >= 1")
        return self

    @classmethod
    def weighted_preset(cls, **overrides) -> "PicardConfig":
        """H^{3/4} data in three dimensions, auxiliary space t^{1/8} H^{1,2}."""
        values = dict(s1=0.75, p=2.0, s2=1.0, c=2.0, a=0.125, aux_norm="weighted")
        values.update(overrides)
        return cls(**values)

    @classmethod
    def la_preset(cls, **overrides) -> "PicardConfig":
        """H^{3/4} data in three dimensions, auxiliary space L^8(H^{1,2})."""
        values = dict(s1=0.75, p=2.0, s2=1.0, c=2.0, a=8.0, aux_norm="la")
        values.update(overrides)
        return cls(**values)

    def time_grid(self) -> TimeGrid:
        if self.spacing == "log":
            return TimeGrid.log_graded(self.horizon, self.time_steps)
        return TimeGrid.uniform(self.horizon, self.time_steps)

    @property
    def sup_spec(self) -> WeightedNormSpec:
        return WeightedNormSpec(a=0.0, k=self.s1, q=self.p)

    @property
    def aux_spec(self) -> Union[WeightedNormSpec, LaNormSpec]:
        if self.aux_norm == "la":
            return LaNormSpec(a=self.a, k=self.s2, q=self.c)
        return WeightedNormSpec(a=self.a, k=self.s2, q=self.c)


@dataclass
class PicardDiagnostics:
    e_norms: List[float] = field(default_factory=list)
    differences: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    converged: bool = False
    final_residual: Optional[float] = None

    @property
    def iterations(self) -> int:
        return len(self.differences)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def to_rows(self) -> List[dict]:
        rows = []
        for m in range(self.iterations):
            rows.append({
                "iteration": m + 1,
                "e_norm": self.e_norms[m],
                "difference": self.differences[m],
                "ratio": self.ratios[m - 1] if m > 0 else float("nan"),
                "residual": self.residuals[m],
            })
        return rows


@dataclass(frozen=True, eq=False)
class PicardResult:
    solution: Trajectory
    diagnostics: PicardDiagnostics
    config: PicardConfig


def aux_norm(u: Trajectory, cfg: PicardConfig) -> float:
    if cfg.aux_norm == "la":
        return la_time_norm(u, cfg.aux_spec)
    return weighted_time_norm(u, cfg.aux_spec)


def e_norm(w: Trajectory, cfg: PicardConfig) -> float:
    """‖w‖_E = sup_t ‖w(t)‖_{s1,p} + auxiliary norm of w."""
    return weighted_time_norm(w, cfg.sup_spec) + aux_norm(w, cfg)


def ball_norm(v: Trajectory, gamma_phi: Trajectory, cfg: PicardConfig) -> float:
    """Distance of v from the free evolution plus the auxiliary size of v."""
    return weighted_time_norm(v - gamma_phi, cfg.sup_spec) + aux_norm(v, cfg)


def _check_initial_datum(phi: SpectralField):
    require_divergence_free(phi, "initial datum")
    scale = np.max(np.abs(phi.coeffs))
    mean = np.max(np.abs(phi.coeffs[(slice(None),) + (0,) * phi.grid.dim]))
    if scale > 0 and mean > MEAN_MODE_TOL * max(scale, 1.0):
        raise ValueError(f"Initial datum must have zero mean (mean mode {mean:.3e})")


def phi_map(u: Trajectory, phi: SpectralField, params: AlphaParam,
            nonlinearity: Nonlinearity = "lans", gamma_phi: Trajectory = None) -> Trajectory:
    """Φu = Γφ - G P^α V^α(u, u) on u's time grid."""
    if u.grid != phi.grid:
        raise ValueError(f"Grid mismatch: trajectory on {u.grid}, datum on {phi.grid}")
    if gamma_phi is None:
        gamma_phi = gamma(phi, u.time_grid, params.nu)
    forcing = u.map(lambda state: projected_nonlinearity(state, params.alpha, nonlinearity))
    return gamma_phi - duhamel(forcing, params.nu)


def residual(u: Trajectory, phi: SpectralField, params: AlphaParam, cfg: PicardConfig) -> float:
    """E-norm of u - Φu."""
    return e_norm(u - phi_map(u, phi, params, cfg.nonlinearity), cfg)


def picard_solve(phi: SpectralField, cfg: PicardConfig, params: AlphaParam,
                 initial: Trajectory = None) -> PicardResult:
    """Iterate u^{m+1} = Φu^m until the E-norm of the update drops below cfg.tolerance."""
    _check_initial_datum(phi)
    time_grid = initial.time_grid if initial is not None else cfg.time_grid()
    gamma_phi = gamma(phi, time_grid, params.nu)
    u = gamma_phi if initial is None else initial
    # image = Φu, kept one iterate ahead of u
    image = phi_map(u, phi, params, cfg.nonlinearity, gamma_phi)
    diagnostics = PicardDiagnostics()
    stalled = 0

    logger.info(
        f"Picard solve: grid={phi.grid.dim}D N={phi.grid.points_per_axis}, "
        f"T={time_grid.horizon}, alpha={params.alpha}, nu={params.nu}, aux={cfg.aux_norm}"
    )
    for m in range(cfg.max_iterations):
        u_next = image
        image = phi_map(u_next, phi, params, cfg.nonlinearity, gamma_phi)
        difference = e_norm(u_next - u, cfg)
        defect = e_norm(u_next - image, cfg)
        size = ball_norm(u_next, gamma_phi, cfg)
        if not np.all(np.isfinite([difference, defect, size])) or size > OVERFLOW_LIMIT:
            logger.error(f"Picard iterate {m + 1} diverged (E-norm {size})")
            raise PicardDivergenceError(f"Picard iteration diverged at iteration {m + 1}", diagnostics)

        if diagnostics.differences:
            previous = diagnostics.differences[-1]
            ratio = difference / previous if previous > 0 else 0.0
            diagnostics.ratios.append(ratio)
            stalled = stalled + 1 if ratio >= 1.0 else 0
        diagnostics.differences.append(difference)
        diagnostics.e_norms.append(size)
        diagnostics.residuals.append(defect)
        u = u_next
        logger.debug(
            f"Picard iteration {m + 1}: difference={difference:.3e}, residual={defect:.3e}, e_norm={size:.3e}"
        )

        if stalled >= NON_CONTRACTION_PATIENCE:
            logger.warning(f"Picard map is not contracting after {m + 1} iterations")
            raise NonContractionError(
                f"Update ratio >= 1 for {NON_CONTRACTION_PATIENCE} consecutive iterations", diagnostics
            )
        if difference < cfg.tolerance:
            diagnostics.converged = True
            break

    diagnostics.final_residual = diagnostics.residuals[-1]
    if diagnostics.converged:
        logger.info(
            f"Picard converged in {diagnostics.iterations} iterations, "
            f"residual={diagnostics.final_residual:.3e}"
        )
    else:
        logger.warning(f"Picard stopped after {cfg.max_iterations} iterations without converging")
    return PicardResult(u, diagnostics, cfg)


def solve_with_retry(phi: SpectralField, cfg: PicardConfig, params: AlphaParam,
                     max_halvings: int = 5) -> PicardResult:
    """picard_solve, halving the horizon after each non-contraction."""
    current = cfg
    for attempt in range(max_halvings + 1):
        try:
            return picard_solve(phi, current, params)
        except NonContractionError:
            if attempt == max_halvings:
                raise
            current = current.model_copy(update={"horizon": current.horizon / 2})
            logger.warning(f"Retrying Picard solve with horizon {current.horizon}")
    raise AssertionError("unreachable")


def uniqueness_check(phi: SpectralField, cfg: PicardConfig, params: AlphaParam) -> dict:
    """Solve from Γφ and from the zero trajectory; report the E-norm gap between the limits."""
    first = picard_solve(phi, cfg, params)
    time_grid = first.solution.time_grid
    zero = SpectralField.zeros(phi.grid)
    start = Trajectory(time_grid, (phi,) + (zero,) * time_grid.steps)
    second = picard_solve(phi, cfg, params, initial=start)
    gap = e_norm(first.solution - second.solution, cfg)
    return {
        "gap": gap,
        "iterations_from_free_flow": first.diagnostics.iterations,
        "iterations_from_zero": second.diagnostics.iterations,
        "converged": first.diagnostics.converged and second.diagnostics.converged,
    }
