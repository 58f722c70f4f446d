"""
Tests for field containers, state constructors and spectral calculus.
"""
import math

import numpy as np
import pytest

from phaselab.errors import AliasingError, DimensionError, ParameterError, ResolutionError
from phaselab.fields import (
    ComplexField,
    HydroFields,
    coherent_state,
    gradient,
    harmonic_ground_state,
    laplacian,
    make_gaussian,
    norm_squared,
    position_width,
    spectral_interpolate,
)
from phaselab.models.physics import Grid1D


class TestGrid:
    """Test grid construction and validation"""

    def test_spacing_and_center(self, grid):
        assert grid.dx == pytest.approx(40.0 / 1024)
        assert grid.center == 0.0
        assert grid.x[0] == -20.0
        assert grid.x[512] == pytest.approx(0.0, abs=1e-12)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            Grid1D(n_points=1000, x_min=-20.0, x_max=20.0)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError, match="x_max"):
            Grid1D(n_points=64, x_min=1.0, x_max=-1.0)


class TestMakeGaussian:
    """Test Gaussian packet construction"""

    def test_normalized(self, grid):
        psi = make_gaussian(grid, 0.0, 1.0)
        assert norm_squared(psi) == pytest.approx(1.0, abs=1e-12)

    def test_density_ratio_matches_gaussian(self, grid):
        """|psi(0)|^2 / |psi(2)|^2 = exp(2) for sigma0 = 1."""
        psi = make_gaussian(grid, 0.0, 1.0)
        at_zero, at_two = spectral_interpolate(psi.density, grid, [0.0, 2.0])
        assert at_zero / at_two == pytest.approx(math.e ** 2, abs=1e-6)

    def test_width_is_sigma0(self, grid):
        assert position_width(make_gaussian(grid, 1.5, 1.0)) == pytest.approx(1.0, abs=1e-9)

    def test_aliased_wavenumber_rejected(self, grid):
        with pytest.raises(AliasingError):
            make_gaussian(grid, 0.0, 1.0, k0=2.0 * math.pi / grid.dx)

    def test_unresolved_width_rejected(self, grid):
        with pytest.raises(ResolutionError):
            make_gaussian(grid, 0.0, grid.dx)

    def test_non_positive_width_rejected(self, grid):
        with pytest.raises(ParameterError):
            make_gaussian(grid, 0.0, 0.0)


class TestNormSquared:
    """Test the discrete norm"""

    def test_zero_field(self, grid):
        assert norm_squared(ComplexField(grid, np.zeros(grid.n_points))) == 0.0

    def test_quadratic_scaling(self, grid):
        psi = make_gaussian(grid, 0.0, 1.0)
        assert norm_squared(psi.scaled(2.0)) == pytest.approx(4.0, abs=1e-12)

    def test_global_phase_leaves_norm_unchanged(self, grid):
        psi = make_gaussian(grid, 0.5, 1.2, k0=0.8)
        for alpha in (math.pi / 7, 1.0, 3.0):
            assert norm_squared(psi.scaled(np.exp(1j * alpha))) == pytest.approx(norm_squared(psi), abs=1e-14)


class TestFieldContainers:
    """Test ComplexField and HydroFields invariants"""

    def test_values_are_read_only(self, grid):
        psi = make_gaussian(grid, 0.0, 1.0)
        with pytest.raises(ValueError):
            psi.values[0] = 1.0

    def test_length_mismatch(self, grid):
        with pytest.raises(DimensionError):
            ComplexField(grid, np.zeros(grid.n_points - 1))

    def test_negative_amplitude_rejected(self, grid):
        R = np.ones(grid.n_points)
        R[3] = -0.1
        with pytest.raises(ParameterError):
            HydroFields(grid, R, np.zeros(grid.n_points))

    def test_material_phase_is_negative_action(self, grid):
        fields = HydroFields(grid, np.ones(grid.n_points), np.full(grid.n_points, 0.3))
        assert np.allclose(fields.material_phase(), -0.3)


class TestHarmonicStates:
    """Test harmonic-oscillator state constructors"""

    def test_ground_state_width(self, grid):
        psi = harmonic_ground_state(grid, 1.0)
        assert position_width(psi) == pytest.approx(math.sqrt(0.5), abs=1e-9)

    def test_coherent_state_is_displaced_ground(self, grid):
        psi = coherent_state(grid, 2.0, 1.0)
        ground = harmonic_ground_state(grid, 1.0, center=2.0)
        assert np.allclose(psi.values, ground.values, atol=1e-12)


class TestSpectralCalculus:
    """Test spectral derivatives and interpolation"""

    def test_gradient_of_sine(self, grid):
        wavenumber = 2.0 * math.pi / grid.length
        f = np.sin(wavenumber * grid.x)
        expected = wavenumber * np.cos(wavenumber * grid.x)
        assert np.max(np.abs(gradient(f, grid) - expected)) <= 1e-10

    def test_laplacian_of_constant(self):
        small = Grid1D(n_points=64, x_min=-20.0, x_max=20.0)
        assert np.max(np.abs(laplacian(np.full(64, 3.0), small))) <= 1e-12

    def test_laplacian_matches_repeated_gradient(self, grid):
        f = np.exp(-(grid.x - 0.5) ** 2 / 2.0) * np.cos(1.3 * grid.x)
        assert np.max(np.abs(laplacian(f, grid) - gradient(gradient(f, grid), grid))) <= 1e-10

    def test_gradient_is_linear(self, grid):
        f = np.exp(-grid.x ** 2 / 4.0)
        g = np.cos(3.0 * 2.0 * math.pi * grid.x / grid.length)
        a, b = 2.5, -0.75
        combined = gradient(a * f + b * g, grid)
        assert np.max(np.abs(combined - (a * gradient(f, grid) + b * gradient(g, grid)))) <= 1e-12

    def test_real_input_gives_real_output(self, grid):
        result = gradient(np.exp(-grid.x ** 2), grid)
        assert np.isrealobj(result)

    def test_wrong_length_rejected(self, grid):
        with pytest.raises(DimensionError):
            gradient(np.zeros(10), grid)

    def test_interpolation_reproduces_samples(self, grid):
        f = np.exp(-(grid.x - 1.0) ** 2)
        points = grid.x[[100, 512, 700]]
        assert np.allclose(spectral_interpolate(f, grid, points), f[[100, 512, 700]], atol=1e-12)

    def test_interpolation_between_samples(self, grid):
        f = np.exp(-grid.x ** 2 / 2.0)
        x = 0.5 * (grid.x[530] + grid.x[531])
        assert spectral_interpolate(f, grid, x) == pytest.approx(math.exp(-x ** 2 / 2.0), abs=1e-10)
