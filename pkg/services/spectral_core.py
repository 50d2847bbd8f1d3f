"""Spectral representation of vector fields on the 2π-periodic box.

Fields are stored as Fourier coefficients normalised so that a physical sample is
u(x) = Σ_k û(k) e^{ik·x}; the L^p norms below use the averaged measure dx/(2π)^n,
which makes the p = 2 norm equal to the plain Plancherel sum Σ|û(k)|².
"""
import os
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Tuple, Union

import numpy as np
import scipy.fft as sfft
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

FFT_WORKERS = int(os.environ.get("LANS_FFT_WORKERS", "-1"))
DIVERGENCE_TOL = 1e-10

Nonlinearity = Literal["lans", "navier_stokes", "off"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, 2π)^n with N points per axis."""

    dim: int
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"Grid dimension must be 2 or 3, got {self.dim}")
        if self.points_per_axis < 8 or self.points_per_axis % 2:
            raise ValueError(
                f"points_per_axis must be an even integer >= 8, got {self.points_per_axis}"
            )

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @property
    def total_modes(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def box_length(self) -> float:
        return 2 * np.pi

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumber lattice, shape (n, N, ..., N), components in [-N/2, N/2-1]."""
        k1 = sfft.fftfreq(self.points_per_axis, d=1.0 / self.points_per_axis)
        return np.array(np.meshgrid(*([k1] * self.dim), indexing="ij"))

    @cached_property
    def derivative_wavenumbers(self) -> np.ndarray:
        # Nyquist is its own conjugate partner; odd multipliers must vanish there.
        k = self.wavenumbers.copy()
        k[k == -self.points_per_axis // 2] = 0.0
        return k

    @cached_property
    def k_squared(self) -> np.ndarray:
        return np.sum(self.wavenumbers ** 2, axis=0)

    @cached_property
    def derivative_k_squared(self) -> np.ndarray:
        return np.sum(self.derivative_wavenumbers ** 2, axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep modes with every |k_i| <= N/3."""
        return np.all(np.abs(self.wavenumbers) <= self.points_per_axis / 3.0, axis=0)

    def physical_mesh(self) -> np.ndarray:
        x = np.arange(self.points_per_axis) * self.box_length / self.points_per_axis
        return np.array(np.meshgrid(*([x] * self.dim), indexing="ij"))


def _readonly(arr: np.ndarray) -> np.ndarray:
    view = np.asarray(arr, dtype=np.complex128).view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a field; components along the leading axis.

    Vector fields carry n components; scalar fields (divergences) carry one.
    """

    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.ndim != self.grid.dim + 1 or coeffs.shape[1:] != self.grid.shape:
            raise ValueError(
                f"Coefficient shape {coeffs.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    @classmethod
    def zeros(cls, grid: Grid, components: int = None) -> "SpectralField":
        components = grid.dim if components is None else components
        return cls(grid, np.zeros((components,) + grid.shape, dtype=np.complex128), True)

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    def with_coeffs(self, coeffs: np.ndarray, divergence_free: bool = None) -> "SpectralField":
        flag = self.divergence_free if divergence_free is None else divergence_free
        return SpectralField(self.grid, coeffs, flag)

    def _check_compatible(self, other: "SpectralField"):
        if not isinstance(other, SpectralField):
            raise TypeError(f"Cannot combine SpectralField with {type(other).__name__}")
        if other.grid != self.grid or other.components != self.components:
            raise ValueError(f"Grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs,
                                self.divergence_free and other.divergence_free)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs,
                                self.divergence_free and other.divergence_free)

    def __mul__(self, scalar: float) -> "SpectralField":
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self.with_coeffs(-self.coeffs)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


@dataclass(frozen=True, eq=False)
class TensorField:
    """n×n tensor field, coefficient array of shape (n, n, N, ..., N)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.ndim != self.grid.dim + 2 or coeffs.shape[2:] != self.grid.shape:
            raise ValueError(
                f"Tensor coefficient shape {coeffs.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    def transpose(self) -> "TensorField":
        return TensorField(self.grid, np.swapaxes(self.coeffs, 0, 1))

    def __add__(self, other: "TensorField") -> "TensorField":
        return TensorField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "TensorField") -> "TensorField":
        return TensorField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "TensorField":
        return TensorField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


AnyField = Union[SpectralField, TensorField]


class SobolevIndex(BaseModel):
    """(s, p) of the Bessel-potential space H^{s,p}."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(allow_inf_nan=False)
    p: float = Field(gt=1.0, allow_inf_nan=False)


class AlphaParam(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0.0, description="Lagrangian averaging length")
    nu: float = Field(gt=0.0, description="Viscosity")

    @field_validator("alpha", "nu")
    @classmethod
    def finite(cls, value: float, info) -> float:
        if not np.isfinite(value):
            raise ValueError(f"{info.field_name} must be finite")
        return value


# ---------------------------------------------------------------------------
# transforms

def _scale(f: AnyField, multiplier: np.ndarray) -> AnyField:
    if isinstance(f, TensorField):
        return TensorField(f.grid, f.coeffs * multiplier)
    return f.with_coeffs(f.coeffs * multiplier)


def to_physical(f: AnyField) -> np.ndarray:
    """Real samples on the grid; leading component axes are preserved."""
    return sfft.ifftn(f.coeffs, axes=f.grid.axes, norm="forward", workers=FFT_WORKERS).real


def to_spectral(samples: np.ndarray, grid: Grid, divergence_free: bool = False) -> AnyField:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[-grid.dim:] != grid.shape:
        raise ValueError(f"Sample shape {samples.shape} does not match grid {grid.shape}")
    coeffs = sfft.fftn(samples, axes=grid.axes, norm="forward", workers=FFT_WORKERS)
    if samples.ndim == grid.dim + 2:
        return TensorField(grid, coeffs)
    if samples.ndim == grid.dim + 1:
        return SpectralField(grid, coeffs, divergence_free)
    raise ValueError(f"Samples must carry component axes, got ndim={samples.ndim}")


def hermitian_residual(f: AnyField) -> float:
    """max |coeff(-k) - conj(coeff(k))| relative to the largest coefficient."""
    axes = f.grid.axes
    reflected = np.roll(np.flip(f.coeffs, axis=axes), 1, axis=axes)
    scale = np.max(np.abs(f.coeffs))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(reflected - np.conj(f.coeffs))) / scale)


def spectral_resample(f: SpectralField, grid: Grid) -> SpectralField:
    """Zero-pad or truncate coefficients onto another grid of the same dimension."""
    if grid.dim != f.grid.dim:
        raise ValueError("Resampling cannot change the dimension")
    target = SpectralField.zeros(grid, f.components).coeffs.copy()
    limit = min(grid.points_per_axis, f.grid.points_per_axis) // 2 - 1
    src_k, dst_k = f.grid.wavenumbers, grid.wavenumbers
    src_keep = np.all(np.abs(src_k) <= limit, axis=0)
    dst_keep = np.all(np.abs(dst_k) <= limit, axis=0)
    # both masks enumerate the same wavenumbers in lexicographic FFT order per axis
    src_idx = np.lexsort(tuple(src_k[:, src_keep]))
    dst_idx = np.lexsort(tuple(dst_k[:, dst_keep]))
    values = f.coeffs[:, src_keep][:, src_idx]
    flat = target[:, dst_keep]
    flat[:, dst_idx] = values
    target[:, dst_keep] = flat
    return SpectralField(grid, target, f.divergence_free)


# ---------------------------------------------------------------------------
# multipliers and norms

def bessel_multiplier(f: AnyField, s: float) -> AnyField:
    """(1-Δ)^{s/2}: coefficient at k scaled by (1+|k|²)^{s/2}."""
    if s == 0:
        return f
    return _scale(f, np.power(1.0 + f.grid.k_squared, s / 2.0))


def helmholtz_inverse(f: AnyField, alpha: float) -> AnyField:
    """(1-α²Δ)^{-1}: coefficient at k scaled by 1/(1+α²|k|²)."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if alpha == 0:
        return f
    return _scale(f, 1.0 / (1.0 + alpha ** 2 * f.grid.k_squared))


def heat_multiplier(grid: Grid, t: float, nu: float) -> np.ndarray:
    return np.exp(-nu * grid.k_squared * t)


def _pointwise_magnitude(samples: np.ndarray, dim: int) -> np.ndarray:
    flat = samples.reshape((-1,) + samples.shape[-dim:])
    return np.sqrt(np.sum(flat ** 2, axis=0))


def sobolev_norm(f: AnyField, idx: SobolevIndex) -> float:
    """‖f‖_{s,p} = ‖(1-Δ)^{s/2} f‖_{L^p}, evaluated by quadrature on the grid."""
    magnitude = _pointwise_magnitude(to_physical(bessel_multiplier(f, idx.s)), f.grid.dim)
    return float(np.mean(magnitude ** idx.p) ** (1.0 / idx.p))


def plancherel_norm(f: AnyField, s: float = 0.0) -> float:
    """(Σ (1+|k|²)^s |û(k)|²)^{1/2} summed over all components."""
    weight = np.power(1.0 + f.grid.k_squared, s)
    return float(np.sqrt(np.sum(weight * np.abs(f.coeffs) ** 2)))


def homogeneous_norm(f: AnyField, s: float) -> float:
    """Ḣ^s seminorm (Σ_{k≠0} |k|^{2s} |û(k)|²)^{1/2}."""
    k2 = f.grid.k_squared
    weight = np.where(k2 > 0, np.power(np.where(k2 > 0, k2, 1.0), s), 0.0)
    return float(np.sqrt(np.sum(weight * np.abs(f.coeffs) ** 2)))


def energy_alpha(u: SpectralField, alpha: float) -> float:
    """E_α = ‖u‖²_{L²} + α²‖∇u‖²_{L²}."""
    weight = 1.0 + alpha ** 2 * u.grid.k_squared
    return float(np.sum(weight * np.abs(u.coeffs) ** 2))


def dissipation_alpha(u: SpectralField, alpha: float) -> float:
    """‖∇u‖²_{L²} + α²‖Δu‖²_{L²}."""
    k2 = u.grid.k_squared
    return float(np.sum((k2 + alpha ** 2 * k2 ** 2) * np.abs(u.coeffs) ** 2))


# ---------------------------------------------------------------------------
# differential operators

def grad(f: SpectralField) -> TensorField:
    """(∇u)_{ij} = ∂_j u_i."""
    k = f.grid.derivative_wavenumbers
    return TensorField(f.grid, 1j * k[np.newaxis, :] * f.coeffs[:, np.newaxis])


def div_tensor(T: TensorField) -> SpectralField:
    """(div T)_i = Σ_j ∂_j T_ij."""
    k = T.grid.derivative_wavenumbers
    return SpectralField(T.grid, np.sum(1j * k[np.newaxis, :] * T.coeffs, axis=1))


def def_tensor(f: SpectralField) -> TensorField:
    g = grad(f)
    return (g + g.transpose()) * 0.5


def rot_tensor(f: SpectralField) -> TensorField:
    g = grad(f)
    return (g - g.transpose()) * 0.5


def divergence(f: SpectralField) -> SpectralField:
    k = f.grid.derivative_wavenumbers
    return SpectralField(f.grid, np.sum(1j * k * f.coeffs, axis=0)[np.newaxis])


def laplacian(f: SpectralField) -> SpectralField:
    return f.with_coeffs(-f.grid.k_squared * f.coeffs)


def divergence_residual(f: SpectralField) -> float:
    """max_k |k·û(k)| relative to max_k |k||û(k)|; zero for a constant field."""
    k = f.grid.derivative_wavenumbers
    k_dot = np.abs(np.sum(k * f.coeffs, axis=0))
    scale = np.max(np.sqrt(f.grid.derivative_k_squared) * np.sqrt(np.sum(np.abs(f.coeffs) ** 2, axis=0)))
    if scale == 0:
        return 0.0
    return float(np.max(k_dot) / scale)


def require_divergence_free(f: SpectralField, what: str = "field", tol: float = DIVERGENCE_TOL):
    residual = divergence_residual(f)
    if residual > tol:
        raise ValueError(f"{what} is not divergence-free (relative residual {residual:.3e})")


# ---------------------------------------------------------------------------
# projectors

def leray_project(f: SpectralField) -> SpectralField:
    """û(k) - k (k·û(k))/|k|², mean mode unchanged."""
    k = f.grid.derivative_wavenumbers
    k2 = f.grid.derivative_k_squared
    k_dot = np.sum(k * f.coeffs, axis=0)
    safe = np.where(k2 > 0, k2, 1.0)
    correction = np.where(k2 > 0, k_dot / safe, 0.0)
    return f.with_coeffs(f.coeffs - k * correction, divergence_free=True)


def stokes_project(f: SpectralField, alpha: float) -> SpectralField:
    """P^α w = w - (1-α²Δ)^{-1} ∇q with (1-α²Δ)v + ∇q = (1-α²Δ)w, div v = 0."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    grid = f.grid
    k = grid.derivative_wavenumbers
    k2 = grid.derivative_k_squared
    helmholtz = 1.0 + alpha ** 2 * grid.k_squared
    # Δq = div((1-α²Δ)w)
    source = np.sum(1j * k * (helmholtz * f.coeffs), axis=0)
    safe = np.where(k2 > 0, k2, 1.0)
    q_hat = np.where(k2 > 0, -source / safe, 0.0)
    grad_q = SpectralField(grid, 1j * k * q_hat)
    return f.with_coeffs(f.coeffs - helmholtz_inverse(grad_q, alpha).coeffs, divergence_free=True)


def dealias(f: AnyField) -> AnyField:
    return _scale(f, f.grid.dealias_mask)


# ---------------------------------------------------------------------------
# quadratic terms

def _check_same_grid(u: SpectralField, v: SpectralField):
    if u.grid != v.grid:
        raise ValueError(f"Grid mismatch: {u.grid} vs {v.grid}")


def _maybe_dealias(f: AnyField, enabled: bool) -> AnyField:
    return dealias(f) if enabled else f


def outer(u: SpectralField, v: SpectralField, dealiased: bool = True) -> TensorField:
    """u⊗v with (u⊗v)_{jk} = u_j v_k, formed in physical space."""
    _check_same_grid(u, v)
    U = to_physical(_maybe_dealias(u, dealiased))
    V = U if v is u else to_physical(_maybe_dealias(v, dealiased))
    product = U[:, np.newaxis] * V[np.newaxis, :]
    return _maybe_dealias(to_spectral(product, u.grid), dealiased)


def _def_rot_product(u: SpectralField, v: SpectralField, dealiased: bool) -> np.ndarray:
    """Physical samples of Def(u)·Rot(v) (matrix product)."""
    G_u = to_physical(_maybe_dealias(grad(u), dealiased))
    G_v = G_u if v is u else to_physical(_maybe_dealias(grad(v), dealiased))
    D_u = 0.5 * (G_u + np.swapaxes(G_u, 0, 1))
    R_v = 0.5 * (G_v - np.swapaxes(G_v, 0, 1))
    return np.einsum("ik...,kj...->ij...", D_u, R_v)


def reynolds_stress(u: SpectralField, v: SpectralField, alpha: float,
                    dealiased: bool = True) -> TensorField:
    """τ^α(u,v) = α²(1-α²Δ)^{-1} ½[Def(u)·Rot(v) + Def(v)·Rot(u)]."""
    _check_same_grid(u, v)
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if alpha == 0:
        return TensorField(u.grid, np.zeros((u.grid.dim, u.grid.dim) + u.grid.shape, complex))
    if v is u:
        product = _def_rot_product(u, u, dealiased)
    else:
        product = 0.5 * (_def_rot_product(u, v, dealiased) + _def_rot_product(v, u, dealiased))
    stress = _maybe_dealias(to_spectral(product, u.grid), dealiased)
    return helmholtz_inverse(stress, alpha) * alpha ** 2


def v_alpha(u: SpectralField, v: SpectralField, alpha: float,
            dealiased: bool = True) -> SpectralField:
    """V^α(u,v) = div(u⊗v) + div τ^α(u,v)."""
    _check_same_grid(u, v)
    result = div_tensor(outer(u, v, dealiased))
    if alpha > 0:
        result = result + div_tensor(reynolds_stress(u, v, alpha, dealiased))
    return result


def projected_nonlinearity(u: SpectralField, alpha: float, mode: Nonlinearity = "lans",
                           dealiased: bool = True) -> SpectralField:
    """P^α V^α(u,u); the Navier-Stokes mode drops the Reynolds stress."""
    if mode == "off":
        return SpectralField.zeros(u.grid, u.components)
    if mode == "navier_stokes":
        return leray_project(div_tensor(outer(u, u, dealiased)))
    if mode == "lans":
        return stokes_project(v_alpha(u, u, alpha, dealiased), alpha)
    raise ValueError(f"Unknown nonlinearity mode: {mode}")


def lans_rhs(u: SpectralField, params: AlphaParam, mode: Nonlinearity = "lans",
             dealiased: bool = True) -> SpectralField:
    """ν Δu - P^α V^α(u,u)."""
    require_divergence_free(u, "lans_rhs input")
    rhs = laplacian(u) * params.nu - projected_nonlinearity(u, params.alpha, mode, dealiased)
    return rhs.with_coeffs(rhs.coeffs, divergence_free=True)
