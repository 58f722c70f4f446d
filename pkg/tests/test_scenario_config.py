"""
Tests for scenario config models, loading and diagnostics.
"""
import copy

import pytest

from phaselab.errors import ConfigurationError
from phaselab.models.physics import FlatTopEnvelope, PhaseKick, PulseSpec
from phaselab.models.scenarios import (
    FreeGaussianScenario,
    load_scenario,
    parse_scenario,
    required_keys,
    scenario_echo,
    scenario_kinds,
)

EXAMPLE_KINDS = [
    "free_gaussian",
    "harmonic_stationary",
    "coherent_state",
    "two_packet_interference",
    "phase_scan_interference",
    "rabi_pulse",
    "phase_jump_scan",
    "adiabatic_ramp",
    "madelung_direct",
    "trajectory_ensemble",
]


class TestExampleConfigs:
    """Every shipped example must validate"""

    @pytest.mark.parametrize("kind", EXAMPLE_KINDS)
    def test_example_validates(self, config_dir, kind):
        scenario = load_scenario(config_dir / f"{kind}.yaml")
        assert scenario.kind == kind

    def test_every_kind_has_an_example(self, config_dir):
        kinds = {load_scenario(path).kind for path in config_dir.glob("*.yaml")}
        assert kinds == set(scenario_kinds())

    def test_free_gaussian_values(self, config_dir):
        scenario = load_scenario(config_dir / "free_gaussian.yaml")
        assert isinstance(scenario, FreeGaussianScenario)
        assert scenario.params.sigma0 == 1.0
        assert scenario.params.t_final == 2.0
        assert scenario.output.snapshot_every == 200


class TestValidation:
    """Test per-field diagnostics for invalid configs"""

    def test_non_power_of_two_grid(self, example_config):
        data = example_config("free_gaussian")
        data["grid"]["n_points"] = 1000
        with pytest.raises(ConfigurationError) as exc_info:
            parse_scenario(data)
        assert any("power of two" in line for line in exc_info.value.diagnostics)
        assert any("n_points" in line for line in exc_info.value.diagnostics)

    def test_unknown_kind(self, example_config):
        data = example_config("free_gaussian")
        data["kind"] = "quantum_teleport"
        with pytest.raises(ConfigurationError) as exc_info:
            parse_scenario(data)
        assert "free_gaussian" in exc_info.value.diagnostics[0]

    def test_unknown_key_rejected(self, example_config):
        data = example_config("free_gaussian")
        data["params"]["colour"] = "blue"
        with pytest.raises(ConfigurationError) as exc_info:
            parse_scenario(data)
        assert any("colour" in line for line in exc_info.value.diagnostics)

    def test_missing_required_key(self, example_config):
        data = example_config("free_gaussian")
        del data["params"]["sigma0"]
        with pytest.raises(ConfigurationError) as exc_info:
            parse_scenario(data)
        assert any("sigma0" in line for line in exc_info.value.diagnostics)

    @pytest.mark.parametrize("name", ["Free Gaussian", "free/gaussian", ""])
    def test_bad_names(self, example_config, name):
        data = example_config("free_gaussian")
        data["name"] = name
        with pytest.raises(ConfigurationError):
            parse_scenario(data)

    def test_unresolved_packet(self, example_config):
        data = example_config("free_gaussian")
        data["params"]["sigma0"] = 0.05
        with pytest.raises(ConfigurationError) as exc_info:
            parse_scenario(data)
        assert any("2*dx" in line for line in exc_info.value.diagnostics)

    def test_time_step_must_divide_duration(self, example_config):
        data = example_config("free_gaussian")
        data["params"]["dt"] = 0.3
        with pytest.raises(ConfigurationError):
            parse_scenario(data)

    def test_coarse_drive_step(self, example_config):
        data = example_config("rabi_pulse")
        data["params"]["dt"] = 0.05
        with pytest.raises(ConfigurationError) as exc_info:
            parse_scenario(data)
        assert any("too coarse" in line for line in exc_info.value.diagnostics)

    def test_close_packets_rejected(self, example_config):
        data = example_config("two_packet_interference")
        data["params"]["separation"] = 3.0
        with pytest.raises(ConfigurationError):
            parse_scenario(data)

    def test_trajectory_ensemble_needs_starts(self, example_config):
        data = example_config("trajectory_ensemble")
        data["params"]["starts"] = []
        data["params"]["quantile_count"] = 0
        with pytest.raises(ConfigurationError):
            parse_scenario(data)

    def test_non_mapping_root(self):
        with pytest.raises(ConfigurationError):
            parse_scenario(["not", "a", "mapping"])


class TestLoading:
    """Test reading config files"""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_scenario(tmp_path / "absent.yaml")

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("name: [unclosed\n")
        with pytest.raises(ConfigurationError):
            load_scenario(path)

    def test_echo_round_trips(self, config_dir):
        scenario = load_scenario(config_dir / "phase_jump_scan.yaml")
        assert parse_scenario(copy.deepcopy(scenario_echo(scenario))) == scenario


class TestRequiredKeys:
    """Test the list-scenarios key listing"""

    def test_free_gaussian_keys(self):
        keys = required_keys("free_gaussian")
        assert keys[:2] == ["name", "kind"]
        assert "params.sigma0" in keys
        assert "params.t_final" in keys
        assert "params.dt" not in keys

    def test_all_kinds_listed(self):
        assert scenario_kinds() == sorted(EXAMPLE_KINDS)


class TestPhysicsModels:
    """Test potential and pulse models"""

    def test_phase_kick_region_order(self):
        with pytest.raises(ValueError):
            PhaseKick(delta_phi=1.0, region=(2.0, 1.0))

    def test_flat_top_window(self):
        with pytest.raises(ValueError):
            FlatTopEnvelope(t_on=0.0, t_off=10.0, ramp=6.0)

    def test_flat_top_ramps(self):
        envelope = FlatTopEnvelope(t_on=0.0, t_off=10.0, ramp=2.0)
        assert envelope(-1.0) == 0.0
        assert envelope(1.0) == pytest.approx(0.5)
        assert envelope(5.0) == 1.0
        assert envelope.breakpoints() == [0.0, 2.0, 8.0, 10.0]

    def test_phase_step_adds_to_later_phase(self):
        pulse = PulseSpec(rabi_peak=1.0, phase_profile=[(1.0, 0.5), (3.0, 0.7)], phase_offset=0.2)
        stepped = pulse.with_phase_step(2.0, 1.0)
        assert stepped.phase(0.5) == pytest.approx(0.2)
        assert stepped.phase(1.5) == pytest.approx(0.7)
        assert stepped.phase(2.5) == pytest.approx(1.7)
        assert stepped.phase(3.5) == pytest.approx(1.9)

    def test_phase_offset(self):
        pulse = PulseSpec(rabi_peak=1.0).with_phase_offset(0.4)
        assert pulse.phase(10.0) == pytest.approx(0.4)
