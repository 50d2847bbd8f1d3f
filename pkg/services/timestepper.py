"""Integrating-factor time stepping of the LANS-α equation."""
import logging
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from services.semigroup_ops import TimeGrid, Trajectory
from services.spectral_core import (
    AlphaParam,
    Nonlinearity,
    SpectralField,
    divergence_residual,
    energy_alpha,
    heat_multiplier,
    leray_project,
    projected_nonlinearity,
    require_divergence_free,
)

logger = logging.getLogger(__name__)


class BlowupDetected(Exception):
    def __init__(self, message: str, last_good_time: Optional[float] = None):
        super().__init__(message)
        self.last_good_time = last_good_time


class StepConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0.0, allow_inf_nan=False)
    scheme: Literal["if_heun"] = "if_heun"
    dealias: bool = True
    nonlinearity: Nonlinearity = "lans"
    energy_growth_limit: float = Field(0.10, gt=0.0)


def _forcing(u: SpectralField, cfg: StepConfig, params: AlphaParam) -> np.ndarray:
    return -projected_nonlinearity(u, params.alpha, cfg.nonlinearity, cfg.dealias).coeffs


def step(u: SpectralField, cfg: StepConfig, params: AlphaParam, h: float = None) -> SpectralField:
    """One Heun step on the integrating-factor form; the viscous part is exact."""
    h = cfg.dt if h is None else h
    factor = heat_multiplier(u.grid, h, params.nu)
    n0 = _forcing(u, cfg, params)
    predictor = u.with_coeffs(factor * (u.coeffs + h * n0))
    n1 = _forcing(predictor, cfg, params)
    updated = leray_project(u.with_coeffs(factor * u.coeffs + 0.5 * h * (factor * n0 + n1)))

    if not updated.is_finite():
        raise BlowupDetected("Non-finite coefficients after time step")
    before = energy_alpha(u, params.alpha)
    after = energy_alpha(updated, params.alpha)
    if before > 0 and after > (1.0 + cfg.energy_growth_limit) * before:
        raise BlowupDetected(
            f"E_alpha grew by {after / before - 1:.1%} in one step (limit {cfg.energy_growth_limit:.0%})"
        )
    return updated


def evolve(phi: SpectralField, horizon: float, cfg: StepConfig, params: AlphaParam,
           sample_times: TimeGrid = None) -> Trajectory:
    """Integrate from φ to the horizon, landing exactly on every sample time.

    Each sampling interval is split into ceil(Δ/dt) equal steps. The trajectory
    metadata records the step count and the divergence residual of every sample.
    """
    if horizon < 0:
        raise ValueError(f"Horizon must be non-negative, got {horizon}")
    require_divergence_free(phi, "initial datum")
    if horizon == 0:
        return Trajectory(TimeGrid.origin(), (phi,),
                          {"divergence_residual": np.array([divergence_residual(phi)]),
                           "steps": np.zeros(1, dtype=int)})
    if sample_times is None:
        sample_times = TimeGrid.uniform(horizon, 10)
    if not math.isclose(sample_times.horizon, horizon, rel_tol=1e-12):
        raise ValueError(f"Sample grid ends at {sample_times.horizon}, expected {horizon}")

    logger.info(
        f"Evolving {phi.grid.dim}D N={phi.grid.points_per_axis} to T={horizon} "
        f"with dt={cfg.dt}, alpha={params.alpha}, nu={params.nu}, mode={cfg.nonlinearity}"
    )
    states = [phi]
    steps = [0]
    u = phi
    t = 0.0
    for target in sample_times.nodes[1:]:
        interval = target - t
        count = max(1, math.ceil(interval / cfg.dt - 1e-9))
        h = interval / count
        for _ in range(count):
            try:
                u = step(u, cfg, params, h)
            except BlowupDetected as e:
                logger.error(f"Blow-up detected near t={t:.6g}: {e}")
                raise BlowupDetected(str(e), last_good_time=t) from e
            t += h
        t = float(target)
        states.append(u)
        steps.append(steps[-1] + count)

    residuals = np.array([divergence_residual(state) for state in states])
    logger.info(f"Evolution finished after {steps[-1]} steps, max divergence residual {residuals.max():.2e}")
    return Trajectory(sample_times, tuple(states),
                      {"divergence_residual": residuals, "steps": np.array(steps)})
