"""Initial-data generators."""
import logging
from typing import Sequence

import numpy as np

from services.spectral_core import Grid, SpectralField, leray_project, to_spectral

logger = logging.getLogger(__name__)

SPECTRAL_MARGIN = 0.01


def gen_taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """Taylor-Green vortex; in 2D the curl of the stream function A sin x sin y."""
    x = grid.physical_mesh()
    if grid.dim == 2:
        samples = amplitude * np.array([
            np.sin(x[0]) * np.cos(x[1]),
            -np.cos(x[0]) * np.sin(x[1]),
        ])
    else:
        samples = amplitude * np.array([
            np.sin(x[0]) * np.cos(x[1]) * np.cos(x[2]),
            -np.cos(x[0]) * np.sin(x[1]) * np.cos(x[2]),
            np.zeros(grid.shape),
        ])
    return to_spectral(samples, grid, divergence_free=True)


def gen_single_mode(grid: Grid, wavevector: Sequence[int], amplitude: float = 1.0,
                    component: int = 0) -> SpectralField:
    """amplitude · cos(k·x) in one component; divergence-free when k is orthogonal to it."""
    if len(wavevector) != grid.dim:
        raise ValueError(f"Wavevector {tuple(wavevector)} does not match a {grid.dim}D grid")
    if not 0 <= component < grid.dim:
        raise ValueError(f"Component {component} out of range")
    if any(abs(k) >= grid.points_per_axis // 2 for k in wavevector):
        raise ValueError(f"Wavevector {tuple(wavevector)} is not resolved on N={grid.points_per_axis}")
    x = grid.physical_mesh()
    phase = sum(k * xi for k, xi in zip(wavevector, x))
    samples = np.zeros((grid.dim,) + grid.shape)
    samples[component] = amplitude * np.cos(phase)
    return to_spectral(samples, grid, divergence_free=wavevector[component] == 0)


def gen_random_sobolev(grid: Grid, s: float, seed: int, amplitude: float = 1.0) -> SpectralField:
    """Random divergence-free field of Sobolev regularity exactly s.

    Coefficients are unit complex Gaussians (Hermitian, so the field is real)
    scaled by amplitude·|k|^{-(s + n/2 + 0.01)}; the mean and Nyquist modes are
    zero and the result is Leray-projected. The same (grid, s, seed, amplitude)
    always yields the same field.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    # forward-normalised FFT of unit white noise has variance 1/N^n per mode
    xi = to_spectral(noise, grid).coeffs * np.sqrt(grid.total_modes)

    k2 = grid.k_squared
    half = grid.points_per_axis // 2
    resolved = np.all(np.abs(grid.wavenumbers) < half, axis=0) & (k2 > 0)
    exponent = -(s + grid.dim / 2.0 + SPECTRAL_MARGIN) / 2.0
    envelope = np.where(resolved, np.power(np.where(k2 > 0, k2, 1.0), exponent), 0.0)

    field = leray_project(SpectralField(grid, amplitude * envelope * xi))
    logger.debug(f"Generated random H^{s} field on {grid.dim}D N={grid.points_per_axis} (seed={seed})")
    return field
