"""
Pydantic models for phaselab: physical value types and scenario configs.
"""
from phaselab.models.physics import (
    NATURAL_UNITS,
    BarrierPotential,
    ConstantEnvelope,
    Envelope,
    FlatTopEnvelope,
    FreePotential,
    GaussianEnvelope,
    Grid1D,
    HarmonicPotential,
    PhaseKick,
    PhysicalConstants,
    Potential,
    PulseSpec,
)
from phaselab.models.scenarios import (
    OutputConfig,
    Scenario,
    load_scenario,
    parse_scenario,
    required_keys,
    scenario_echo,
    scenario_kinds,
)

__all__ = [
    "NATURAL_UNITS",
    "BarrierPotential",
    "ConstantEnvelope",
    "Envelope",
    "FlatTopEnvelope",
    "FreePotential",
    "GaussianEnvelope",
    "Grid1D",
    "HarmonicPotential",
    "PhaseKick",
    "PhysicalConstants",
    "Potential",
    "PulseSpec",
    "OutputConfig",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "required_keys",
    "scenario_echo",
    "scenario_kinds",
]
