"""
Split-step spectral propagator for the time-dependent Schrodinger equation.

This is the reference solution: everything on the Madelung side is
checked against fields produced here.
"""
import json
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from phaselab.config import DEFAULT_SNAPSHOT_CAP
from phaselab.errors import DegenerateStateError, InstabilityError, ParameterError
from phaselab.fields import ComplexField, norm_squared
from phaselab.models.physics import NATURAL_UNITS, FreePotential, Grid1D, PhaseKick, PhysicalConstants

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PropagationResult:
    psi_final: ComplexField
    snapshots: Tuple[ComplexField, ...]
    times: np.ndarray
    norm_drift: float
    steps: int
    dt: float
    snapshot_stride: int


class SplitStepPropagator:
    """
    Strang step exp(-iV dt/2hbar) exp(-iT dt/hbar) exp(-iV dt/2hbar).

    dt may be negative, which runs the evolution backwards.
    """

    def __init__(self, grid: Grid1D, potential=None, dt: float = 1e-3,
                 constants: PhysicalConstants = NATURAL_UNITS):
        if dt == 0.0 or not math.isfinite(dt):
            raise ParameterError(f"time step must be finite and non-zero (got {dt})")
        potential = potential or FreePotential()
        self.grid = grid
        self.dt = dt
        self.constants = constants
        hbar, mass = constants.hbar, constants.mass
        V = potential.values(grid, constants)
        self.half_potential = np.exp(-0.5j * V * dt / hbar)
        self.kinetic = np.exp(-0.5j * hbar * grid.k ** 2 * dt / mass)

        kinetic_phase = abs(dt) * hbar * grid.k_nyquist ** 2 / (2.0 * mass)
        if kinetic_phase >= math.pi:
            logger.warning(json.dumps({
                "event": "split_step.coarse_dt",
                "dt": dt,
                "kinetic_phase": kinetic_phase,
            }))

    def step(self, values: np.ndarray) -> np.ndarray:
        out = self.half_potential * values
        out = np.fft.ifft(self.kinetic * np.fft.fft(out))
        return self.half_potential * out

    def run(self, values: np.ndarray, n_steps: int) -> np.ndarray:
        for _ in range(n_steps):
            values = self.step(values)
        return values


def _check_finite(values: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(values)):
        raise InstabilityError(f"non-finite wavefunction values {where}")


def split_step(psi: ComplexField, V, dt: float,
               constants: PhysicalConstants = NATURAL_UNITS) -> ComplexField:
    """One Strang step; a phase kick is applied at the start of the step."""
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive (got {dt})")
    _check_finite(psi.values, "before split step")
    values = psi.values
    if isinstance(V, PhaseKick):
        values = values * V.phase_factor(psi.grid)
        V = FreePotential()
    values = SplitStepPropagator(psi.grid, V, dt, constants).step(values)
    _check_finite(values, "after split step")
    return psi.with_values(values)


def step_count(t_final: float, dt: float) -> int:
    if not t_final > 0.0:
        raise ParameterError(f"t_final must be positive (got {t_final})")
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive (got {dt})")
    n_steps = int(round(t_final / dt))
    if n_steps < 1 or abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ParameterError(f"dt={dt} does not divide t_final={t_final}")
    return n_steps


def evolve(psi0: ComplexField, V, t_final: float, dt: float, snapshot_every: int = 1,
           constants: PhysicalConstants = NATURAL_UNITS,
           snapshot_cap: int = DEFAULT_SNAPSHOT_CAP) -> PropagationResult:
    """
    Repeated split steps from t=0 to t_final.

    Snapshots are taken every `snapshot_every` steps plus the final step.
    When more than `snapshot_cap` would be held, the stride doubles and
    the stored snapshots are thinned to match.
    """
    if snapshot_every < 1:
        raise ParameterError(f"snapshot_every must be >= 1 (got {snapshot_every})")
    if snapshot_cap < 2:
        raise ParameterError(f"snapshot_cap must be >= 2 (got {snapshot_cap})")
    n_steps = step_count(t_final, dt)
    _check_finite(psi0.values, "in initial state")

    kick: Optional[PhaseKick] = None
    kick_step = -1
    if isinstance(V, PhaseKick):
        kick = V
        kick_step = int(round(kick.at_time / dt))
        if kick_step > n_steps:
            raise ParameterError(f"phase kick at t={kick.at_time} falls after t_final={t_final}")
        V = FreePotential()
    propagator = SplitStepPropagator(psi0.grid, V, dt, constants)

    stride = snapshot_every
    stored: List[Tuple[int, np.ndarray]] = [(0, psi0.values)]
    values = np.array(psi0.values)
    for n in range(n_steps):
        if n == kick_step:
            values = values * kick.phase_factor(psi0.grid)
        values = propagator.step(values)
        step = n + 1
        if step % stride == 0 and step < n_steps:
            _check_finite(values, f"at step {step}")
            stored.append((step, values))
            while len(stored) > snapshot_cap - 1:
                stride *= 2
                stored = [(s, v) for s, v in stored if s % stride == 0]
    if kick_step == n_steps:
        values = values * kick.phase_factor(psi0.grid)
    _check_finite(values, "at t_final")
    stored.append((n_steps, values))

    psi_final = psi0.with_values(values)
    drift = abs(norm_squared(psi_final) - norm_squared(psi0))
    if stride != snapshot_every:
        logger.debug(f"Snapshot stride raised from {snapshot_every} to {stride} to respect cap {snapshot_cap}")
    return PropagationResult(
        psi_final=psi_final,
        snapshots=tuple(psi0.with_values(v) for _, v in stored),
        times=np.array([s * dt for s, _ in stored]),
        norm_drift=drift,
        steps=n_steps,
        dt=dt,
        snapshot_stride=stride,
    )


def expectation_position(psi: ComplexField) -> float:
    norm = norm_squared(psi)
    if not norm > 0.0:
        raise DegenerateStateError("expectation value of a zero-norm field")
    return float(np.sum(psi.grid.x * psi.density) * psi.grid.dx / norm)


def expectation_energy(psi: ComplexField, V=None,
                       constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """<psi|T + V|psi> / <psi|psi> with T applied spectrally."""
    norm = norm_squared(psi)
    if not norm > 0.0:
        raise DegenerateStateError("expectation value of a zero-norm field")
    V = V or FreePotential()
    grid = psi.grid
    kinetic = constants.hbar ** 2 * grid.k ** 2 / (2.0 * constants.mass)
    t_psi = np.fft.ifft(kinetic * np.fft.fft(psi.values))
    h_psi = t_psi + V.values(grid, constants) * psi.values
    energy = np.sum(np.conj(psi.values) * h_psi) * grid.dx / norm
    if abs(energy.imag) > 1e-10 * max(1.0, abs(energy.real)):
        logger.warning(f"Energy expectation has imaginary residue {energy.imag:.3e}")
    return float(energy.real)


def analytic_free_width(sigma0: float, t: float,
                        constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """sigma(t) = sigma0 * sqrt(1 + (hbar t / 2 m sigma0^2)^2) for a free Gaussian."""
    tau = constants.hbar * t / (2.0 * constants.mass * sigma0 ** 2)
    return sigma0 * math.sqrt(1.0 + tau ** 2)
