"""
Physical value types: constants, grids, potentials and drive pulses.

All models are frozen pydantic models so they can be shared between
threads and echoed verbatim into run manifests.
"""
import math
from bisect import bisect_right
from typing import Annotated, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from phaselab.errors import ParameterError


class PhysicalConstants(BaseModel):
    """Action and mass units (natural units by default)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    hbar: float = Field(default=1.0, gt=0, description="Action unit")
    mass: float = Field(default=1.0, gt=0, description="Particle mass")


NATURAL_UNITS = PhysicalConstants()


class Grid1D(BaseModel):
    """
    Uniform periodic grid x_i = x_min + i*dx, i = 0..n_points-1.

    x_max itself is not a sample; it is identified with x_min.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_points: int = Field(default=1024, ge=8, description="Sample count, power of two")
    x_min: float = Field(default=-20.0)
    x_max: float = Field(default=20.0)

    @field_validator("n_points")
    @classmethod
    def validate_power_of_two(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError(f"n_points must be a power of two (got {v})")
        return v

    @model_validator(mode="after")
    def validate_bounds(self) -> "Grid1D":
        if not self.x_max > self.x_min:
            raise ValueError("x_max must be greater than x_min")
        return self

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def k_nyquist(self) -> float:
        return math.pi / self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    def index_of(self, x: float) -> int:
        """Nearest sample index to x."""
        return int(round((x - self.x_min) / self.dx)) % self.n_points

    def contains(self, x: float, margin: float = 0.0) -> bool:
        return self.x_min + margin <= x <= self.x_max - margin


# --- potentials -------------------------------------------------------------

class FreePotential(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["free"] = "free"

    def values(self, grid: Grid1D, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
        return np.zeros(grid.n_points)


class HarmonicPotential(BaseModel):
    """V = m*omega^2*(x - center)^2 / 2"""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["harmonic"] = "harmonic"
    omega: float = Field(default=1.0, gt=0)
    center: float = 0.0

    def values(self, grid: Grid1D, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
        return 0.5 * constants.mass * self.omega ** 2 * (grid.x - self.center) ** 2


class BarrierPotential(BaseModel):
    """Rectangular barrier of given height on |x - center| <= width/2."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["barrier"] = "barrier"
    height: float
    width: float = Field(gt=0)
    center: float = 0.0

    def values(self, grid: Grid1D, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
        inside = np.abs(grid.x - self.center) <= 0.5 * self.width
        return np.where(inside, self.height, 0.0)


class PhaseKick(BaseModel):
    """
    Instantaneous multiplication of psi by exp(i*delta_phi) on a region.

    Equivalent to a potential pulse V*tau = -hbar*delta_phi with tau -> 0.
    Between kicks the particle is free.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["phase_kick"] = "phase_kick"
    delta_phi: float
    region: Tuple[float, float]
    window: Literal["during_step"] = "during_step"
    at_time: float = Field(default=0.0, ge=0)
    edge_width: float = Field(default=0.0, ge=0, description="tanh edge width; 0 is sharp")

    @field_validator("region")
    @classmethod
    def validate_region(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not v[1] > v[0]:
            raise ValueError("phase_kick region must satisfy start < end")
        return v

    def values(self, grid: Grid1D, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
        return np.zeros(grid.n_points)

    def weight(self, grid: Grid1D) -> np.ndarray:
        """Fraction of delta_phi applied at each sample (0..1)."""
        start, end = self.region
        if not (grid.contains(start) and grid.contains(end)):
            raise ParameterError(
                f"phase_kick region {self.region} outside grid [{grid.x_min}, {grid.x_max}]"
            )
        x = grid.x
        if self.edge_width == 0.0:
            return ((x >= start) & (x <= end)).astype(float)
        return 0.5 * (np.tanh((x - start) / self.edge_width) - np.tanh((x - end) / self.edge_width))

    def phase_factor(self, grid: Grid1D) -> np.ndarray:
        return np.exp(1j * self.delta_phi * self.weight(grid))


Potential = Annotated[
    Union[FreePotential, HarmonicPotential, BarrierPotential, PhaseKick],
    Field(discriminator="kind"),
]


# --- drive pulses -------------------------------------------------------------

class ConstantEnvelope(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["constant"] = "constant"

    def __call__(self, t: float) -> float:
        return 1.0

    def breakpoints(self) -> List[float]:
        return []


class GaussianEnvelope(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["gaussian"] = "gaussian"
    t_center: float
    t_width: float = Field(gt=0)

    def __call__(self, t: float) -> float:
        return math.exp(-0.5 * ((t - self.t_center) / self.t_width) ** 2)

    def breakpoints(self) -> List[float]:
        return []


class FlatTopEnvelope(BaseModel):
    """Zero outside [t_on, t_off]; sin^2 rise and fall of length `ramp`."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["flat_top"] = "flat_top"
    t_on: float
    t_off: float
    ramp: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def validate_window(self) -> "FlatTopEnvelope":
        if self.t_off - self.t_on < 2.0 * self.ramp or self.t_off <= self.t_on:
            raise ValueError("flat_top needs t_off - t_on >= 2*ramp and t_off > t_on")
        return self

    def __call__(self, t: float) -> float:
        if t < self.t_on or t > self.t_off:
            return 0.0
        if self.ramp > 0.0:
            if t < self.t_on + self.ramp:
                return math.sin(0.5 * math.pi * (t - self.t_on) / self.ramp) ** 2
            if t > self.t_off - self.ramp:
                return math.sin(0.5 * math.pi * (self.t_off - t) / self.ramp) ** 2
        return 1.0

    def breakpoints(self) -> List[float]:
        points = [self.t_on, self.t_off]
        if self.ramp > 0.0:
            points += [self.t_on + self.ramp, self.t_off - self.ramp]
        return sorted(set(points))


Envelope = Annotated[
    Union[ConstantEnvelope, GaussianEnvelope, FlatTopEnvelope],
    Field(discriminator="kind"),
]


class PulseSpec(BaseModel):
    """
    Drive of a two-level system: Omega(t) = rabi_peak * envelope(t),
    detuning Delta, and a piecewise-constant optical phase phi(t).

    phase_profile lists (time, phase) jump points; phi equals phase_offset
    before the first point and phase_offset + the last value reached
    afterwards.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    rabi_peak: float = Field(ge=0)
    envelope: Envelope = Field(default_factory=ConstantEnvelope)
    detuning: float = 0.0
    phase_profile: List[Tuple[float, float]] = Field(default_factory=list)
    phase_offset: float = 0.0

    @field_validator("phase_profile")
    @classmethod
    def validate_jump_times(cls, v: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        times = [t for t, _ in v]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("phase_profile jump times must be strictly increasing")
        return v

    def rabi(self, t: float) -> float:
        return self.rabi_peak * self.envelope(t)

    def phase(self, t: float) -> float:
        times = [p[0] for p in self.phase_profile]
        idx = bisect_right(times, t) - 1
        return self.phase_offset + (self.phase_profile[idx][1] if idx >= 0 else 0.0)

    def jump_times(self) -> List[float]:
        return [t for t, _ in self.phase_profile]

    def generalized_rabi_max(self) -> float:
        return math.hypot(self.detuning, self.rabi_peak)

    def with_phase_offset(self, offset: float) -> "PulseSpec":
        """Same pulse with `offset` added to phi at all times."""
        return self.model_copy(update={"phase_offset": self.phase_offset + offset})

    def with_phase_step(self, at: float, delta: float) -> "PulseSpec":
        """Insert a phase step: phi(t) -> phi(t) + delta for t >= at."""
        before = [(t, phi) for t, phi in self.phase_profile if t < at]
        after = [(t, phi + delta) for t, phi in self.phase_profile if t > at]
        step = [(at, self.phase(at) - self.phase_offset + delta)]
        return self.model_copy(update={"phase_profile": before + step + after})
