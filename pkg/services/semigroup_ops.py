"""Heat semigroup, Duhamel integral and the time-weighted norms built on them."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Literal, Mapping, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import exprel

from services.spectral_core import (
    Grid,
    SobolevIndex,
    SpectralField,
    heat_multiplier,
    require_divergence_free,
    sobolev_norm,
)

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-3
MIN_FRACTION = 1e-6


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing sample times starting at t0 = 0."""

    nodes: np.ndarray
    policy: Literal["uniform", "log", "custom", "origin"] = "custom"
    min_fraction: float = MIN_FRACTION

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("TimeGrid needs a one-dimensional array of nodes")
        if nodes[0] != 0.0:
            raise ValueError(f"TimeGrid must start at 0, got {nodes[0]}")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("TimeGrid nodes must be strictly increasing")
        if self.policy != "origin" and nodes.size < 3:
            raise ValueError("TimeGrid needs at least two steps (M >= 2)")
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> "TimeGrid":
        if horizon <= 0:
            raise ValueError(f"Horizon must be positive, got {horizon}")
        return cls(np.linspace(0.0, horizon, steps + 1), "uniform")

    @classmethod
    def log_graded(cls, horizon: float, steps: int, min_fraction: float = MIN_FRACTION) -> "TimeGrid":
        """0 followed by `steps` geometrically spaced nodes from horizon·min_fraction to horizon."""
        if horizon <= 0:
            raise ValueError(f"Horizon must be positive, got {horizon}")
        if not 0 < min_fraction < 1:
            raise ValueError(f"min_fraction must lie in (0, 1), got {min_fraction}")
        geometric = np.geomspace(horizon * min_fraction, horizon, steps)
        return cls(np.concatenate(([0.0], geometric)), "log", min_fraction)

    @classmethod
    def origin(cls) -> "TimeGrid":
        return cls(np.zeros(1), "origin")

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> int:
        return self.nodes.size - 1

    def refine(self, factor: int = 2) -> "TimeGrid":
        """Finer grid of the same policy that contains every current node."""
        if factor < 1:
            raise ValueError("Refinement factor must be >= 1")
        if self.policy == "uniform":
            return TimeGrid.uniform(self.horizon, self.steps * factor)
        if self.policy == "log":
            geometric = np.geomspace(self.nodes[1], self.horizon, (self.steps - 1) * factor + 1)
            return TimeGrid(np.concatenate(([0.0], geometric)), "log", self.min_fraction)
        fine = [self.nodes[:1]]
        for a, b in zip(self.nodes[:-1], self.nodes[1:]):
            fine.append(np.linspace(a, b, factor + 1)[1:])
        return TimeGrid(np.concatenate(fine), "custom")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One SpectralField per node of a TimeGrid, all on the same spatial grid."""

    time_grid: TimeGrid
    states: Tuple[SpectralField, ...]
    metadata: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(self.states)
        if len(states) != self.time_grid.nodes.size:
            raise ValueError(
                f"Trajectory has {len(states)} states for {self.time_grid.nodes.size} nodes"
            )
        grids = {state.grid for state in states}
        if len(grids) != 1:
            raise ValueError("Trajectory states live on different grids")
        object.__setattr__(self, "states", states)

    @property
    def times(self) -> np.ndarray:
        return self.time_grid.nodes

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def initial(self) -> SpectralField:
        return self.states[0]

    @property
    def final(self) -> SpectralField:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)

    def state_at(self, t: float) -> SpectralField:
        """State stored at node t; no interpolation between nodes."""
        i = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[i], t, rtol=1e-12, atol=1e-15):
            raise KeyError(f"t={t} is not a node of this trajectory")
        return self.states[i]

    def map(self, fn: Callable[[SpectralField], SpectralField]) -> "Trajectory":
        return Trajectory(self.time_grid, tuple(fn(state) for state in self.states))

    def _zip(self, other: "Trajectory", op) -> "Trajectory":
        if other.time_grid is not self.time_grid and not np.array_equal(other.times, self.times):
            raise ValueError("Trajectories are sampled on different time grids")
        return Trajectory(self.time_grid, tuple(op(a, b) for a, b in zip(self.states, other.states)))

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        return self._zip(other, lambda a, b: a - b)

    def __add__(self, other: "Trajectory") -> "Trajectory":
        return self._zip(other, lambda a, b: a + b)

    def is_finite(self) -> bool:
        return all(state.is_finite() for state in self.states)

    @classmethod
    def constant(cls, state: SpectralField, time_grid: TimeGrid) -> "Trajectory":
        return cls(time_grid, (state,) * time_grid.nodes.size)


class WeightedNormSpec(BaseModel):
    """Time-weighted norm sup_t t^a ‖u(t)‖_{k,q}."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(ge=0.0, allow_inf_nan=False)
    k: float = Field(allow_inf_nan=False)
    q: float = Field(gt=1.0, allow_inf_nan=False)

    @property
    def index(self) -> SobolevIndex:
        return SobolevIndex(s=self.k, p=self.q)


class LaNormSpec(BaseModel):
    """L^a-in-time norm (∫ ‖u(t)‖^a_{k,q} dt)^{1/a}."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(ge=1.0, allow_inf_nan=False)
    k: float = Field(allow_inf_nan=False)
    q: float = Field(gt=1.0, allow_inf_nan=False)

    @property
    def index(self) -> SobolevIndex:
        return SobolevIndex(s=self.k, p=self.q)


def heat_propagate(f: SpectralField, t: float, nu: float) -> SpectralField:
    """e^{νtΔ} f."""
    if t < 0:
        raise ValueError(f"Heat propagation time must be non-negative, got {t}")
    if t == 0:
        return f
    return f.with_coeffs(f.coeffs * heat_multiplier(f.grid, t, nu))


def gamma(phi: SpectralField, time_grid: TimeGrid, nu: float) -> Trajectory:
    """Free evolution Γφ(t) = e^{νtΔ}φ sampled on the grid."""
    require_divergence_free(phi, "initial datum")
    return Trajectory(time_grid, tuple(heat_propagate(phi, t, nu) for t in time_grid.nodes))


def _phi1(z: np.ndarray) -> np.ndarray:
    return exprel(z)


def _phi2(z: np.ndarray) -> np.ndarray:
    """(e^z - 1 - z)/z², series near 0."""
    small = np.abs(z) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, z)
    direct = (exprel(safe) - 1.0) / safe
    series = 0.5 + z / 6.0 + z ** 2 / 24.0 + z ** 3 / 120.0
    return np.where(small, series, direct)


def duhamel(g: Trajectory, nu: float) -> Trajectory:
    """G g(t) = ∫_0^t e^{ν(t-s)Δ} g(s) ds.

    The forcing is interpolated linearly between nodes and every Fourier mode is
    integrated exactly against its exponential, so G g(0) = 0 and a forcing that
    is constant per mode is reproduced to roundoff.
    """
    if len(g) == 0:
        raise ValueError("Duhamel integral needs a non-empty forcing trajectory")
    grid = g.grid
    lam = nu * grid.k_squared
    times = g.times
    w = np.zeros_like(g.states[0].coeffs)
    flag = all(state.divergence_free for state in g.states)
    out = [SpectralField(grid, w, flag)]
    for j in range(len(times) - 1):
        h = times[j + 1] - times[j]
        z = -lam * h
        p1 = _phi1(z)
        p2 = _phi2(z)
        w = np.exp(z) * w + h * ((p1 - p2) * g.states[j].coeffs + p2 * g.states[j + 1].coeffs)
        out.append(SpectralField(grid, w, flag))
    return Trajectory(g.time_grid, tuple(out))


def norm_series(u: Trajectory, idx: SobolevIndex) -> np.ndarray:
    return np.array([sobolev_norm(state, idx) for state in u.states])


def weighted_time_norm(u: Trajectory, spec: WeightedNormSpec) -> float:
    """sup_{t>0} t^a ‖u(t)‖_{k,q} over the samples (t = 0 counted when a = 0)."""
    times = u.times
    norms = norm_series(u, spec.index)
    if spec.a == 0:
        return float(np.max(norms))
    positive = times > 0
    if not np.any(positive):
        return 0.0
    return float(np.max(times[positive] ** spec.a * norms[positive]))


def la_time_norm(u: Trajectory, spec: LaNormSpec) -> float:
    """(∫_0^T ‖u(t)‖^a_{k,q} dt)^{1/a} by the trapezoid rule on the trajectory's nodes."""
    norms = norm_series(u, spec.index)
    integral = np.trapezoid(norms ** spec.a, u.times)
    return float(integral ** (1.0 / spec.a))


def _mapping_gap(s_from: float, s_to: float, q_from: float, q_to: float, n: int) -> float:
    return (s_to - s_from + n / q_from - n / q_to) / 2.0


def g_mapping_weight(k_in: float, s_in: float, s_out: float, q_in: float, q_out: float, n: int) -> float:
    """Output time weight k'' of G between weighted spaces with input weight k'.

    k'' = k' - 1 + (s'' - s' + n/q' - n/q'')/2, valid for 0 <= gap < 1 and k' < 1.
    """
    gap = _mapping_gap(s_in, s_out, q_in, q_out, n)
    if not 0 <= gap < 1:
        raise ValueError(f"Smoothing gap {gap} outside [0, 1)")
    if k_in >= 1:
        raise ValueError(f"Input time weight must be < 1, got {k_in}")
    return k_in - 1 + gap


def la_exponent_pair(sigma_in: float, s_in: float, s_out: float, q_in: float, q_out: float,
                     n: int) -> float:
    """Output exponent σ'' of G on L^σ-in-time spaces: 1/σ'' = 1/σ' - (1 - gap)."""
    gap = _mapping_gap(s_in, s_out, q_in, q_out, n)
    if not 0 <= gap < 1:
        raise ValueError(f"Smoothing gap {gap} outside [0, 1)")
    inverse = 1.0 / sigma_in - (1.0 - gap)
    if sigma_in <= 1 or inverse <= 0 or 1.0 / inverse <= sigma_in:
        raise ValueError(f"No admissible exponent pair for sigma'={sigma_in}, gap={gap}")
    return 1.0 / inverse


def la_exponent(s_from: float, s_to: float, q_from: float, q_to: float, n: int) -> Dict[str, float]:
    """Time exponent σ with 1/σ = gap for which Γ maps H^{s_from,q_from} into L^σ(H^{s_to,q_to})."""
    gap = _mapping_gap(s_from, s_to, q_from, q_to, n)
    if not 0 < gap <= 1.0 / q_from:
        raise ValueError(f"Gap {gap} must lie in (0, 1/q]")
    return {"gap": gap, "sigma": 1.0 / gap}
