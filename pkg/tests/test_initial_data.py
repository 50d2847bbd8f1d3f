import numpy as np
import pytest

from services.initial_data import gen_random_sobolev, gen_single_mode, gen_taylor_green
from services.spectral_core import (
    Grid,
    divergence_residual,
    hermitian_residual,
    plancherel_norm,
    spectral_resample,
    to_physical,
)


class TestTaylorGreen:
    @pytest.mark.parametrize("dim", [2, 3])
    def test_divergence_free_and_real(self, dim):
        field = gen_taylor_green(Grid(dim, 16), amplitude=0.5)
        assert field.divergence_free
        assert divergence_residual(field) < 1e-13
        assert hermitian_residual(field) < 1e-13

    def test_amplitude_scales_samples(self):
        grid = Grid(2, 16)
        samples = to_physical(gen_taylor_green(grid, amplitude=2.0))
        assert np.max(np.abs(samples)) == pytest.approx(2.0, rel=1e-12)

    def test_three_dimensional_has_no_vertical_component(self, grid3d):
        samples = to_physical(gen_taylor_green(grid3d))
        assert np.max(np.abs(samples[2])) == 0.0


class TestSingleMode:
    def test_orthogonal_wavevector_is_divergence_free(self, grid3d):
        field = gen_single_mode(grid3d, (0, 2, 1), component=0)
        assert field.divergence_free
        assert divergence_residual(field) == 0.0

    def test_parallel_wavevector_is_flagged(self, grid2d):
        field = gen_single_mode(grid2d, (1, 0), component=0)
        assert not field.divergence_free
        assert divergence_residual(field) > 0.5

    def test_energy_of_a_cosine(self, grid2d):
        field = gen_single_mode(grid2d, (0, 3), amplitude=2.0, component=0)
        # mean of (2 cos)^2 is 2
        assert plancherel_norm(field) ** 2 == pytest.approx(2.0)

    @pytest.mark.parametrize("wavevector, component", [((0, 8), 0), ((1, 2, 3), 0), ((0, 1), 2)])
    def test_rejects_bad_arguments(self, grid2d, wavevector, component):
        with pytest.raises(ValueError):
            gen_single_mode(grid2d, wavevector, component=component)


class TestRandomSobolev:
    def test_deterministic_per_seed(self, grid3d):
        a = gen_random_sobolev(grid3d, s=1.0, seed=4)
        b = gen_random_sobolev(grid3d, s=1.0, seed=4)
        c = gen_random_sobolev(grid3d, s=1.0, seed=5)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
        assert plancherel_norm(a - c) > 0

    def test_structure(self, grid3d):
        field = gen_random_sobolev(grid3d, s=0.75, seed=1)
        assert field.divergence_free
        assert divergence_residual(field) < 1e-12
        assert hermitian_residual(field) < 1e-12
        assert np.all(field.coeffs[(slice(None),) + (0,) * 3] == 0)
        nyquist = np.any(np.abs(grid3d.wavenumbers) == 8, axis=0)
        assert np.all(field.coeffs[:, nyquist] == 0)

    def test_amplitude_is_linear(self, grid2d):
        one = gen_random_sobolev(grid2d, s=1.0, seed=2, amplitude=1.0)
        three = gen_random_sobolev(grid2d, s=1.0, seed=2, amplitude=3.0)
        np.testing.assert_allclose(three.coeffs, 3 * one.coeffs, atol=1e-15)

    def test_spectrum_has_the_prescribed_slope(self):
        grid = Grid(3, 32)
        s = 0.75
        field = gen_random_sobolev(grid, s=s, seed=0)
        k = np.sqrt(grid.k_squared)
        density = np.sum(np.abs(field.coeffs) ** 2, axis=0)
        # compensated so that every shell carries the same mean
        compensated = density * k ** (2 * s + 3 + 0.02)

        def shell_mean(lo, hi):
            shell = (k >= lo) & (k < hi) & np.all(np.abs(grid.wavenumbers) < 16, axis=0)
            return compensated[shell].mean()

        assert shell_mean(8, 12) == pytest.approx(shell_mean(4, 8), rel=0.1)

    def test_regularity_is_borderline(self):
        grid = Grid(3, 32)
        field = gen_random_sobolev(grid, s=0.75, seed=3)
        below, above = plancherel_norm(field, 0.5), plancherel_norm(field, 1.25)
        coarse = spectral_resample(field, Grid(3, 16))
        # the norm above the regularity keeps growing with resolution, the one below barely moves
        assert above / plancherel_norm(coarse, 1.25) > 1.2
        assert below / plancherel_norm(coarse, 0.5) < 1.2
