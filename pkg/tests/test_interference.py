"""
Tests for two-packet preparation, fringe read-out and phase scans.
"""
import math

import numpy as np
import pytest

from phaselab.errors import NoFringeError, ParameterError, PreparationError
from phaselab.fields import make_gaussian, norm_squared
from phaselab.interference import (
    far_field_fringe_spacing,
    fringe_analysis,
    fringe_fit_line,
    phase_to_fringe_scan,
    predicted_fringe_spacing,
    predicted_visibility,
    two_packet_state,
)
from phaselab.models.physics import FreePotential
from phaselab.schrodinger import evolve


def angular_distance(a: float, b: float) -> float:
    return abs(math.remainder(a - b, 2.0 * math.pi))


def spread(psi, t):
    return evolve(psi, FreePotential(), t, 1e-2, snapshot_every=int(round(t / 1e-2))).psi_final


class TestTwoPacketState:
    """Test preparation of the two-packet superposition"""

    def test_in_phase_is_symmetric(self, wide_grid):
        psi = two_packet_state(wide_grid, 12.0, 1.0)
        modulus = np.abs(psi.values[1:])
        assert np.max(np.abs(modulus - modulus[::-1])) <= 1e-12

    def test_opposite_phase_has_central_node(self, wide_grid):
        psi = two_packet_state(wide_grid, 12.0, 1.0, delta_phi=math.pi)
        assert abs(psi.values[wide_grid.index_of(0.0)]) <= 1e-12

    @pytest.mark.parametrize("delta_phi", [0.0, 0.4, math.pi / 2, math.pi])
    def test_normalized(self, wide_grid, delta_phi):
        psi = two_packet_state(wide_grid, 12.0, 1.0, delta_phi=delta_phi)
        assert norm_squared(psi) == pytest.approx(1.0, abs=1e-10)

    def test_overlapping_packets_rejected(self, wide_grid):
        with pytest.raises(PreparationError):
            two_packet_state(wide_grid, 4.0, 1.0)

    def test_packet_near_boundary_rejected(self, grid):
        with pytest.raises(PreparationError):
            two_packet_state(grid, 36.0, 1.0)


class TestPredictions:
    """Test analytic fringe predictions"""

    def test_exact_spacing_tends_to_far_field(self):
        exact = predicted_fringe_spacing(8.0, 1.0, 600.0)
        assert exact == pytest.approx(far_field_fringe_spacing(8.0, 600.0), rel=1e-4)

    def test_far_field_spacing(self):
        assert far_field_fringe_spacing(8.0, 6.0) == pytest.approx(1.5 * math.pi)

    def test_visibility(self):
        assert predicted_visibility(1.0) == 1.0
        assert predicted_visibility(0.5) == pytest.approx(0.8)


class TestFringeAnalysis:
    """Test fringe spacing, phase and visibility read-out"""

    def test_fringe_spacing(self, wide_grid):
        psi = spread(two_packet_state(wide_grid, 8.0, 1.0), 6.0)
        expected = predicted_fringe_spacing(8.0, 1.0, 6.0)
        analysis = fringe_analysis(psi, expected)
        assert analysis.fringe_spacing == pytest.approx(expected, rel=0.005)
        assert angular_distance(analysis.phase_shift, 0.0) <= 0.05
        assert analysis.visibility == pytest.approx(1.0, abs=0.01)

    def test_opposite_phase(self, wide_grid):
        psi = spread(two_packet_state(wide_grid, 8.0, 1.0, delta_phi=math.pi), 6.0)
        analysis = fringe_analysis(psi, predicted_fringe_spacing(8.0, 1.0, 6.0))
        assert angular_distance(analysis.phase_shift, math.pi) <= 0.05
        assert analysis.center_intensity <= 0.05 * float(np.max(psi.density))

    @pytest.mark.parametrize("separation,t_free", [(8.0, 6.0), (12.0, 12.0)])
    @pytest.mark.parametrize("ratio", [0.5, 0.8])
    def test_unequal_amplitudes_lower_visibility(self, wide_grid, separation, t_free, ratio):
        psi = spread(two_packet_state(wide_grid, separation, 1.0, delta_phi=0.6, amplitude_ratio=ratio), t_free)
        expected = predicted_fringe_spacing(separation, 1.0, t_free)
        analysis = fringe_analysis(psi, expected)
        assert analysis.visibility == pytest.approx(predicted_visibility(ratio), abs=0.01)
        assert analysis.fringe_spacing == pytest.approx(expected, rel=0.005)
        assert angular_distance(analysis.phase_shift, 0.6) <= 0.02

    def test_single_packet_has_no_fringes(self, grid):
        psi = make_gaussian(grid, 0.0, 1.0)
        with pytest.raises(NoFringeError):
            fringe_analysis(psi, predicted_fringe_spacing(12.0, 1.0, 12.0))

    def test_hint_must_be_positive(self, wide_grid):
        with pytest.raises(ParameterError):
            fringe_analysis(two_packet_state(wide_grid, 12.0, 1.0), 0.0)


class TestPhaseScan:
    """Test applied phase against extracted fringe shift"""

    @pytest.mark.timeout(120)
    def test_slope_is_one(self, wide_grid):
        phis = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi]
        pairs = phase_to_fringe_scan(wide_grid, 12.0, 1.0, 12.0, phis)
        slope, offset = fringe_fit_line(pairs)
        assert slope == pytest.approx(1.0, abs=0.02)
        assert abs(offset) <= 0.05
        for applied, extracted in pairs:
            assert extracted == pytest.approx(applied, abs=0.05)

    def test_zero_phase_reference(self, wide_grid):
        ((applied, extracted),) = phase_to_fringe_scan(wide_grid, 12.0, 1.0, 12.0, [0.0])
        assert extracted == pytest.approx(0.0, abs=0.05)

    @pytest.mark.timeout(120)
    @pytest.mark.parametrize("phi", [math.pi / 2, math.pi, 3 * math.pi / 2])
    def test_mid_flight_kick_matches_preparation(self, wide_grid, phi):
        ((_, prepared),) = phase_to_fringe_scan(wide_grid, 12.0, 1.0, 12.0, [phi], mode="preparation")
        ((_, kicked),) = phase_to_fringe_scan(wide_grid, 12.0, 1.0, 12.0, [phi], mode="mid_flight",
                                              kick_time=0.5)
        assert kicked == pytest.approx(prepared, abs=0.05)

    def test_line_fit_needs_two_points(self):
        with pytest.raises(ParameterError):
            fringe_fit_line([(0.0, 0.0)])

    def test_empty_scan_rejected(self, wide_grid):
        with pytest.raises(ParameterError):
            phase_to_fringe_scan(wide_grid, 12.0, 1.0, 12.0, [])
