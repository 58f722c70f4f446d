"""
Driven two-level system in the rotating-wave approximation.

Basis order is (g, e). The drive phase phi(t) sits in the off-diagonal
coupling, so a phase jump rotates the Bloch-sphere axis of the drive
without touching the dressed quasi-energies.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from phaselab.errors import InstabilityError, ParameterError
from phaselab.models.physics import NATURAL_UNITS, PhysicalConstants, PulseSpec

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6
STEP_GUARD = 0.1
_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class TwoLevelState:
    c_g: complex
    c_e: complex
    t: float = 0.0

    def __post_init__(self):
        norm = abs(self.c_g) ** 2 + abs(self.c_e) ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ParameterError(f"two-level state is not normalised (|c_g|^2 + |c_e|^2 = {norm:.12g})")

    @classmethod
    def ground(cls, t: float = 0.0) -> "TwoLevelState":
        return cls(1.0 + 0.0j, 0.0j, t)

    @classmethod
    def excited(cls, t: float = 0.0) -> "TwoLevelState":
        return cls(0.0j, 1.0 + 0.0j, t)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c_g, self.c_e], dtype=complex)

    @property
    def p_g(self) -> float:
        return abs(self.c_g) ** 2

    @property
    def p_e(self) -> float:
        return abs(self.c_e) ** 2


@dataclass(frozen=True)
class DressedDecomposition:
    theta: float
    e_plus: float
    e_minus: float
    a_plus: complex
    a_minus: complex
    degenerate: bool = False

    @property
    def p_plus(self) -> float:
        return abs(self.a_plus) ** 2

    @property
    def p_minus(self) -> float:
        return abs(self.a_minus) ** 2

    @property
    def gap(self) -> float:
        return self.e_plus - self.e_minus


def rwa_hamiltonian(pulse: PulseSpec, t: float,
                    constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
    """H(t) = hbar [[0, Omega e^{-i phi}/2], [Omega e^{i phi}/2, -Delta]]."""
    coupling = 0.5 * pulse.rabi(t) * np.exp(-1j * pulse.phase(t))
    return constants.hbar * np.array(
        [[0.0, coupling], [np.conj(coupling), -pulse.detuning]],
        dtype=complex,
    )


def _step_times(t0: float, t_final: float, dt: float, breakpoints: Sequence[float]) -> np.ndarray:
    n = max(1, int(math.ceil((t_final - t0) / dt - 1e-9)))
    times = list(t0 + dt * np.arange(n))
    times.append(t_final)
    times += [b for b in breakpoints if t0 < b < t_final]
    times = np.unique(np.asarray(times, dtype=float))
    keep = np.concatenate(([True], np.diff(times) > 1e-12 * max(1.0, abs(t_final))))
    return times[keep]


def _magnus_propagator(pulse: PulseSpec, t: float, h: float) -> np.ndarray:
    """Fourth-order Magnus step from two Gauss-Legendre nodes."""
    unit = NATURAL_UNITS
    a1 = -1j * rwa_hamiltonian(pulse, t + (0.5 - _GAUSS_OFFSET) * h, unit)
    a2 = -1j * rwa_hamiltonian(pulse, t + (0.5 + _GAUSS_OFFSET) * h, unit)
    omega = 0.5 * h * (a1 + a2) + (math.sqrt(3.0) / 12.0) * h ** 2 * (a2 @ a1 - a1 @ a2)
    return expm(omega)


def propagate(state0: TwoLevelState, pulse: PulseSpec, t_final: float, dt: float) -> List[TwoLevelState]:
    """
    Integrate i dc/dt = (H/hbar) c from state0.t to t_final.

    Steps are split at phase jumps and envelope breakpoints so that the
    drive is smooth inside every step. Every step is recorded.
    """
    if not t_final > state0.t:
        raise ParameterError(f"t_final={t_final} must lie after the initial time {state0.t}")
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive (got {dt})")
    guard = dt * pulse.generalized_rabi_max()
    if guard >= STEP_GUARD:
        raise ParameterError(
            f"dt*sqrt(detuning^2 + rabi_peak^2) = {guard:.4g} must be below {STEP_GUARD}"
        )

    breakpoints = list(pulse.jump_times()) + list(pulse.envelope.breakpoints())
    times = _step_times(state0.t, t_final, dt, breakpoints)
    vector = state0.vector
    start_norm = float(np.vdot(vector, vector).real)
    states = [state0]
    for t, t_next in zip(times[:-1], times[1:]):
        vector = _magnus_propagator(pulse, t, t_next - t) @ vector
        drift = abs(float(np.vdot(vector, vector).real) - start_norm)
        if drift > NORM_TOLERANCE:
            raise InstabilityError(f"norm drifted by {drift:.3e} at t={t_next:.6g}")
        states.append(TwoLevelState(complex(vector[0]), complex(vector[1]), float(t_next)))
    return states


def dressed_decompose(state: TwoLevelState, pulse: PulseSpec,
                      constants: PhysicalConstants = NATURAL_UNITS) -> DressedDecomposition:
    """
    Project onto the instantaneous eigenstates of H(state.t).

    |+> = (cos theta, sin theta e^{i phi}), |-> = (-sin theta e^{-i phi}, cos theta)
    with tan(2 theta) = Omega / Delta.
    """
    rabi = pulse.rabi(state.t)
    phi = pulse.phase(state.t)
    delta = pulse.detuning
    generalized = math.hypot(delta, rabi)
    degenerate = generalized == 0.0
    theta = 0.0 if degenerate else 0.5 * math.atan2(rabi, delta)

    plus = np.array([math.cos(theta), math.sin(theta) * np.exp(1j * phi)])
    minus = np.array([-math.sin(theta) * np.exp(-1j * phi), math.cos(theta)])
    vector = state.vector
    return DressedDecomposition(
        theta=theta,
        e_plus=0.5 * constants.hbar * (-delta + generalized),
        e_minus=0.5 * constants.hbar * (-delta - generalized),
        a_plus=complex(np.vdot(plus, vector)),
        a_minus=complex(np.vdot(minus, vector)),
        degenerate=degenerate,
    )


def dressed_trajectory(states: Sequence[TwoLevelState], pulse: PulseSpec,
                       constants: PhysicalConstants = NATURAL_UNITS) -> List[DressedDecomposition]:
    return [dressed_decompose(state, pulse, constants) for state in states]


def phase_scan(pulse_template: PulseSpec, jump_time: float, jump_values: Sequence[float],
               t_final: float, dt: float,
               state0: Optional[TwoLevelState] = None) -> List[Tuple[float, float]]:
    """Final P_e for each phase step inserted at jump_time, in input order."""
    if not len(jump_values):
        raise ParameterError("phase_scan needs at least one jump value")
    state0 = state0 or TwoLevelState.ground()
    results = []
    for value in jump_values:
        pulse = pulse_template.with_phase_step(jump_time, value)
        final = propagate(state0, pulse, t_final, dt)[-1]
        results.append((float(value), final.p_e))
    return results
