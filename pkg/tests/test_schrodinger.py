"""
Tests for the split-step Schrodinger propagator and its expectation values.
"""
import math

import numpy as np
import pytest

from phaselab.errors import InstabilityError, ParameterError
from phaselab.fields import ComplexField, coherent_state, harmonic_ground_state, make_gaussian, norm_squared, position_width
from phaselab.models.physics import FreePotential, HarmonicPotential, PhaseKick
from phaselab.schrodinger import (
    SplitStepPropagator,
    analytic_free_width,
    evolve,
    expectation_energy,
    expectation_position,
    split_step,
    step_count,
)


class TestSplitStep:
    """Test single propagation steps"""

    def test_single_free_step_is_unitary(self, grid):
        psi = split_step(make_gaussian(grid, 0.0, 1.0), FreePotential(), 0.01)
        assert norm_squared(psi) == pytest.approx(1.0, abs=1e-12)

    def test_non_positive_dt_rejected(self, grid):
        with pytest.raises(ParameterError):
            split_step(make_gaussian(grid, 0.0, 1.0), FreePotential(), 0.0)

    def test_non_finite_state_rejected(self, grid):
        values = np.array(make_gaussian(grid, 0.0, 1.0).values)
        values[10] = np.nan
        with pytest.raises(InstabilityError):
            split_step(ComplexField(grid, values), FreePotential(), 0.01)

    def test_backward_step_undoes_forward_step(self, grid):
        psi = make_gaussian(grid, -1.0, 1.0, k0=1.0)
        potential = HarmonicPotential(omega=0.5)
        forward = SplitStepPropagator(grid, potential, 0.01).run(psi.values, 50)
        back = SplitStepPropagator(grid, potential, -0.01).run(forward, 50)
        assert np.max(np.abs(back - psi.values)) <= 1e-10

    def test_phase_kick_applies_phase_on_region(self, grid):
        psi = make_gaussian(grid, 0.0, 1.0)
        kick = PhaseKick(delta_phi=math.pi, region=(grid.x_min, grid.x_max))
        kicked = split_step(psi, kick, 1e-3)
        free = split_step(psi, FreePotential(), 1e-3)
        assert np.allclose(kicked.values, -free.values, atol=1e-12)


class TestEvolve:
    """Test multi-step evolution against analytic results"""

    def test_free_gaussian_spreading(self, grid):
        result = evolve(make_gaussian(grid, 0.0, 1.0), FreePotential(), 2.0, 1e-3, snapshot_every=200)
        assert position_width(result.psi_final) == pytest.approx(math.sqrt(2.0), abs=1e-3)

    def test_snapshot_count(self, grid):
        result = evolve(make_gaussian(grid, 0.0, 1.0), FreePotential(), 2.0, 1e-3, snapshot_every=200)
        assert len(result.snapshots) == 11
        assert result.times[0] == 0.0
        assert result.times[-1] == pytest.approx(2.0)
        assert result.steps == 2000

    def test_norm_drift(self, grid):
        result = evolve(make_gaussian(grid, 0.0, 1.0), FreePotential(), 2.0, 1e-3, snapshot_every=200)
        assert result.norm_drift <= 1e-10

    def test_harmonic_ground_state_modulus_is_stationary(self, grid):
        psi0 = harmonic_ground_state(grid, 1.0)
        result = evolve(psi0, HarmonicPotential(omega=1.0), 1.0, 1e-3, snapshot_every=1000)
        deviation = np.max(np.abs(np.abs(result.psi_final.values) - np.abs(psi0.values)))
        assert deviation <= 1e-6

    def test_coherent_state_returns_after_one_period(self, grid):
        period = 2.0 * math.pi
        result = evolve(coherent_state(grid, 2.0, 1.0), HarmonicPotential(omega=1.0), period,
                        period / 6000, snapshot_every=1000)
        assert expectation_position(result.psi_final) == pytest.approx(2.0, abs=1e-3)

    def test_coherent_state_follows_cosine(self, grid):
        result = evolve(coherent_state(grid, 2.0, 1.0), HarmonicPotential(omega=1.0), 3.0, 1e-3,
                        snapshot_every=500)
        centres = np.array([expectation_position(psi) for psi in result.snapshots])
        assert np.max(np.abs(centres - 2.0 * np.cos(result.times))) <= 1e-3

    def test_strang_splitting_is_second_order(self, grid):
        potential = HarmonicPotential(omega=1.0)
        errors = []
        for dt in (0.1, 0.05, 0.025):
            result = evolve(coherent_state(grid, 2.0, 1.0), potential, 1.5, dt, snapshot_every=1000)
            errors.append(abs(expectation_position(result.psi_final) - 2.0 * math.cos(1.5)))
        assert 3.5 <= errors[0] / errors[1] <= 4.5
        assert 3.5 <= errors[1] / errors[2] <= 4.5

    def test_snapshot_cap_thins_history(self, grid):
        result = evolve(make_gaussian(grid, 0.0, 1.0), FreePotential(), 1.0, 1e-3,
                        snapshot_every=1, snapshot_cap=16)
        assert len(result.snapshots) <= 16
        assert result.snapshot_stride > 1
        assert result.times[-1] == pytest.approx(1.0)
        spacing = np.diff(result.times[:-1])
        assert np.allclose(spacing, result.snapshot_stride * 1e-3)

    def test_kick_during_evolution(self, grid):
        psi0 = make_gaussian(grid, 0.0, 1.0)
        kick = PhaseKick(delta_phi=math.pi / 2, region=(grid.x_min, grid.x_max), at_time=0.5)
        kicked = evolve(psi0, kick, 1.0, 1e-2, snapshot_every=100).psi_final
        free = evolve(psi0, FreePotential(), 1.0, 1e-2, snapshot_every=100).psi_final
        assert np.allclose(kicked.values, 1j * free.values, atol=1e-12)

    def test_kick_after_final_time_rejected(self, grid):
        kick = PhaseKick(delta_phi=1.0, region=(0.0, 5.0), at_time=2.0)
        with pytest.raises(ParameterError):
            evolve(make_gaussian(grid, 0.0, 1.0), kick, 1.0, 1e-2)

    def test_non_dividing_dt_rejected(self):
        with pytest.raises(ParameterError, match="does not divide"):
            step_count(1.0, 0.3)


class TestExpectations:
    """Test expectation values"""

    def test_position(self, grid):
        assert expectation_position(make_gaussian(grid, 3.0, 1.0)) == pytest.approx(3.0, abs=1e-9)

    def test_harmonic_ground_energy(self, grid):
        energy = expectation_energy(harmonic_ground_state(grid, 1.0), HarmonicPotential(omega=1.0))
        assert energy == pytest.approx(0.5, abs=1e-6)

    def test_free_gaussian_energy(self, grid):
        assert expectation_energy(make_gaussian(grid, 0.0, 1.0)) == pytest.approx(0.125, abs=1e-6)

    def test_analytic_width(self):
        assert analytic_free_width(1.0, 2.0) == pytest.approx(math.sqrt(2.0))
