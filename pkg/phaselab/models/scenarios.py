"""
Scenario configuration models.

A scenario file is YAML with a top-level `kind` that selects one of the
models below. Every kind shares `name`, `grid`, `physics` and `output`;
kind-specific settings live under `params`. Unknown keys anywhere are
validation errors.
"""
import logging
import math
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union, get_args

import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from phaselab.errors import ConfigurationError, format_validation_error
from phaselab.models.physics import (
    BarrierPotential,
    FreePotential,
    Grid1D,
    HarmonicPotential,
    PhysicalConstants,
    PulseSpec,
)

logger = logging.getLogger(__name__)

NAME_PATTERN = r"^[a-z0-9_-]+$"


class OutputConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    snapshot_every: int = Field(default=100, ge=1, description="Steps between stored snapshots")
    emit_svg: bool = Field(default=True, description="Write SVG plots next to the CSVs")


def _check_time_step(t_final: float, dt: float, label: str = "t_final") -> None:
    steps = t_final / dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ValueError(f"dt={dt} does not divide {label}={t_final}")


def _check_packet(grid: Grid1D, x0: float, sigma0: float, k0: float = 0.0) -> None:
    if sigma0 < 2.0 * grid.dx:
        raise ValueError(f"sigma0={sigma0} is below 2*dx={2.0 * grid.dx:.6g}")
    if abs(k0) >= grid.k_nyquist:
        raise ValueError(f"|k0|={abs(k0)} is at or beyond the Nyquist limit {grid.k_nyquist:.6g}")
    if not grid.contains(x0, margin=5.0 * sigma0):
        raise ValueError(f"packet at x0={x0} is closer than 5*sigma0 to the grid boundary")


def _check_drive_step(pulse: PulseSpec, dt: float) -> None:
    if dt * pulse.generalized_rabi_max() >= 0.1:
        raise ValueError(
            f"dt={dt} too coarse for generalized Rabi frequency {pulse.generalized_rabi_max():.6g}"
            " (need dt*sqrt(detuning^2 + rabi_peak^2) < 0.1)"
        )


# --- per-kind parameters -----------------------------------------------------

class FreeGaussianParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    sigma0: float = Field(gt=0)
    t_final: float = Field(gt=0)
    x0: float = 0.0
    k0: float = 0.0
    dt: float = Field(default=1e-3, gt=0)


class HarmonicStationaryParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    omega: float = Field(gt=0)
    t_final: float = Field(gt=0)
    dt: float = Field(default=1e-3, gt=0)
    epsilon: float = Field(default=1e-3, gt=0, lt=1)


class CoherentStateParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    omega: float = Field(gt=0)
    x0: float
    t_final: float = Field(gt=0)
    dt: float = Field(default=1e-3, gt=0)


class TwoPacketParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    separation: float = Field(gt=0)
    sigma0: float = Field(gt=0)
    t_free: float = Field(gt=0)
    delta_phi: float = 0.0
    amplitude_ratio: float = Field(default=1.0, gt=0)
    dt: float = Field(default=1e-2, gt=0)


class PhaseScanParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    separation: float = Field(gt=0)
    sigma0: float = Field(gt=0)
    t_free: float = Field(gt=0)
    phis: List[float] = Field(min_length=1)
    mode: Literal["preparation", "mid_flight"] = "preparation"
    kick_time: float = Field(default=0.5, ge=0)
    dt: float = Field(default=1e-2, gt=0)


class RabiPulseParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    pulse: PulseSpec
    t_final: float = Field(gt=0)
    dt: float = Field(default=1e-3, gt=0)
    initial: Literal["ground", "excited"] = "ground"


class PhaseJumpScanParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    pulse: PulseSpec
    jump_time: float = Field(ge=0)
    jump_values: List[float] = Field(min_length=1)
    t_final: float = Field(gt=0)
    dt: float = Field(default=1e-3, gt=0)


class AdiabaticRampParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    pulse: PulseSpec
    t_final: float = Field(gt=0)
    dt: float = Field(default=2e-2, gt=0)


class MadelungDirectParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    sigma0: float = Field(gt=0)
    t_final: float = Field(gt=0)
    x0: float = 0.0
    k0: float = 0.0
    dt_max: Optional[float] = Field(default=None, gt=0, description="Upper bound on the Madelung step; default is the stability limit")
    oracle_dt: float = Field(default=1e-3, gt=0)
    epsilon: float = Field(default=1e-3, gt=0, lt=1)


class TrajectoryEnsembleParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    sigma0: float = Field(gt=0)
    t_final: float = Field(gt=0)
    x0: float = 0.0
    k0: float = 0.0
    potential: Annotated[
        Union[FreePotential, HarmonicPotential, BarrierPotential],
        Field(discriminator="kind"),
    ] = Field(default_factory=FreePotential)
    starts: List[float] = Field(default_factory=list)
    quantile_count: int = Field(default=0, ge=0, description="Extra starts at |psi|^2 quantiles")
    dt: float = Field(default=1e-3, gt=0)
    epsilon: float = Field(default=1e-3, gt=0, lt=1)

    @model_validator(mode="after")
    def validate_starts(self) -> "TrajectoryEnsembleParams":
        if not self.starts and self.quantile_count == 0:
            raise ValueError("give at least one of starts or quantile_count")
        return self


# --- scenarios ---------------------------------------------------------------

class ScenarioBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(pattern=NAME_PATTERN)
    grid: Grid1D = Field(default_factory=Grid1D)
    physics: PhysicalConstants = Field(default_factory=PhysicalConstants)
    output: OutputConfig = Field(default_factory=OutputConfig)


class FreeGaussianScenario(ScenarioBase):
    """Free spreading of a Gaussian packet checked against sigma(t)."""
    kind: Literal["free_gaussian"]
    params: FreeGaussianParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "FreeGaussianScenario":
        _check_packet(self.grid, self.params.x0, self.params.sigma0, self.params.k0)
        _check_time_step(self.params.t_final, self.params.dt)
        return self


class HarmonicStationaryScenario(ScenarioBase):
    """Harmonic ground state: stationary modulus and coupled-equation residuals."""
    kind: Literal["harmonic_stationary"]
    params: HarmonicStationaryParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "HarmonicStationaryScenario":
        width = math.sqrt(self.physics.hbar / (2.0 * self.physics.mass * self.params.omega))
        _check_packet(self.grid, 0.0, width)
        _check_time_step(self.params.t_final, self.params.dt)
        return self


class CoherentStateScenario(ScenarioBase):
    """Displaced harmonic ground state whose centre follows x0*cos(omega*t)."""
    kind: Literal["coherent_state"]
    params: CoherentStateParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "CoherentStateScenario":
        width = math.sqrt(self.physics.hbar / (2.0 * self.physics.mass * self.params.omega))
        _check_packet(self.grid, self.params.x0, width)
        _check_packet(self.grid, -self.params.x0, width)
        _check_time_step(self.params.t_final, self.params.dt)
        return self


class TwoPacketInterferenceScenario(ScenarioBase):
    kind: Literal["two_packet_interference"]
    params: TwoPacketParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "TwoPacketInterferenceScenario":
        p = self.params
        if p.separation < 6.0 * p.sigma0:
            raise ValueError("separation must be at least 6*sigma0")
        _check_packet(self.grid, self.grid.center - 0.5 * p.separation, p.sigma0)
        _check_packet(self.grid, self.grid.center + 0.5 * p.separation, p.sigma0)
        _check_time_step(p.t_free, p.dt, "t_free")
        return self


class PhaseScanInterferenceScenario(ScenarioBase):
    kind: Literal["phase_scan_interference"]
    params: PhaseScanParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "PhaseScanInterferenceScenario":
        p = self.params
        if p.separation < 6.0 * p.sigma0:
            raise ValueError("separation must be at least 6*sigma0")
        _check_packet(self.grid, self.grid.center - 0.5 * p.separation, p.sigma0)
        _check_packet(self.grid, self.grid.center + 0.5 * p.separation, p.sigma0)
        _check_time_step(p.t_free, p.dt, "t_free")
        if p.mode == "mid_flight" and p.kick_time > p.t_free:
            raise ValueError("kick_time must not exceed t_free")
        return self


class RabiPulseScenario(ScenarioBase):
    kind: Literal["rabi_pulse"]
    params: RabiPulseParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "RabiPulseScenario":
        _check_drive_step(self.params.pulse, self.params.dt)
        return self


class PhaseJumpScanScenario(ScenarioBase):
    kind: Literal["phase_jump_scan"]
    params: PhaseJumpScanParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "PhaseJumpScanScenario":
        if self.params.jump_time > self.params.t_final:
            raise ValueError("jump_time must not exceed t_final")
        _check_drive_step(self.params.pulse, self.params.dt)
        return self


class AdiabaticRampScenario(ScenarioBase):
    """Slowly ramped drive: dressed populations stay put while bare ones move."""
    kind: Literal["adiabatic_ramp"]
    params: AdiabaticRampParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "AdiabaticRampScenario":
        _check_drive_step(self.params.pulse, self.params.dt)
        return self


class MadelungDirectScenario(ScenarioBase):
    kind: Literal["madelung_direct"]
    params: MadelungDirectParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "MadelungDirectScenario":
        _check_packet(self.grid, self.params.x0, self.params.sigma0, self.params.k0)
        _check_time_step(self.params.t_final, self.params.oracle_dt)
        return self


class TrajectoryEnsembleScenario(ScenarioBase):
    kind: Literal["trajectory_ensemble"]
    params: TrajectoryEnsembleParams

    @model_validator(mode="after")
    def validate_ranges(self) -> "TrajectoryEnsembleScenario":
        _check_packet(self.grid, self.params.x0, self.params.sigma0, self.params.k0)
        _check_time_step(self.params.t_final, self.params.dt)
        for x in self.params.starts:
            if not self.grid.contains(x, margin=5.0 * self.grid.dx):
                raise ValueError(f"trajectory start {x} lies outside the grid interior")
        return self


Scenario = Annotated[
    Union[
        FreeGaussianScenario,
        HarmonicStationaryScenario,
        CoherentStateScenario,
        TwoPacketInterferenceScenario,
        PhaseScanInterferenceScenario,
        RabiPulseScenario,
        PhaseJumpScanScenario,
        AdiabaticRampScenario,
        MadelungDirectScenario,
        TrajectoryEnsembleScenario,
    ],
    Field(discriminator="kind"),
]

SCENARIO_MODELS = {
    get_args(model.model_fields["kind"].annotation)[0]: model
    for model in get_args(get_args(Scenario)[0])
}

_adapter = TypeAdapter(Scenario)


def scenario_kinds() -> List[str]:
    return sorted(SCENARIO_MODELS)


def required_keys(kind: str) -> List[str]:
    """Dotted keys a config of this kind must spell out."""
    model = SCENARIO_MODELS[kind]
    keys = ["name", "kind"]
    params_model = model.model_fields["params"].annotation
    keys += [f"params.{field}" for field, info in params_model.model_fields.items() if info.is_required()]
    return keys


def parse_scenario(data: Any) -> BaseModel:
    """Validate an already-parsed mapping; raises ConfigurationError."""
    if not isinstance(data, dict):
        raise ConfigurationError("scenario config must be a mapping", ["<root>: expected a mapping"])
    kind = data.get("kind")
    if kind not in SCENARIO_MODELS:
        raise ConfigurationError(
            f"unknown scenario kind {kind!r}",
            [f"kind: must be one of {', '.join(scenario_kinds())} (got {kind!r})"],
        )
    try:
        return _adapter.validate_python(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid {kind} scenario", format_validation_error(e)) from e


def load_scenario(path: Union[str, Path]) -> BaseModel:
    """Read and validate a YAML scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}", [f"{path}: {e.strerror or e}"]) from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"cannot parse {path}", [f"{path}: {e}"]) from e
    scenario = parse_scenario(data)
    logger.debug(f"Loaded scenario {scenario.name} ({scenario.kind}) from {path}")
    return scenario


def scenario_echo(scenario: BaseModel) -> Dict[str, Any]:
    """Fully resolved config, JSON-ready, for the run manifest."""
    return scenario.model_dump(mode="json")
