"""
Hydrodynamic (Madelung) form of the Schrodinger equation.

With psi = R exp(iS/hbar) the wave equation splits into

    dS/dt + (dS/dx)^2 / 2m + V + Q = 0,      Q = -(hbar^2 / 2m) R'' / R
    d(R^2)/dt + d/dx (R^2 S' / m) = 0

This module extracts (R, S) from wavefunctions, evaluates both residuals,
and integrates the pair directly for node-free states. Everything that
divides by R is restricted to a ValidMask.
"""
import json
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from phaselab.errors import (
    DegenerateStateError,
    InstabilityError,
    InsufficientDataError,
    NodeError,
    ParameterError,
    SpacingError,
    UnwrapError,
)
from phaselab.fields import ComplexField, HydroFields, gradient, laplacian, norm_squared
from phaselab.models.physics import NATURAL_UNITS, FreePotential, PhysicalConstants

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-3
MAX_PHASE_STEP = 0.9 * math.pi
EDGE_FIT_POINTS = 16
TAIL_WAVENUMBER_FRACTION = 0.5
STAGE_FLOOR = 1e-3
STABILITY_FACTOR = 0.2
GROWTH_LIMIT = 1e3


@dataclass(frozen=True, eq=False)
class ValidMask:
    """Points where R > epsilon * max(R)."""
    epsilon: float
    mask: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError(f"mask epsilon must lie in (0, 1) (got {self.epsilon})")
        mask = np.array(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_amplitude(cls, R: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> "ValidMask":
        R = np.asarray(R, dtype=float)
        peak = float(np.max(R)) if R.size else 0.0
        if not peak > 0.0:
            raise DegenerateStateError("cannot build a valid mask for a zero amplitude")
        return cls(epsilon, R > epsilon * peak)

    @classmethod
    def from_fields(cls, fields: HydroFields, epsilon: float = DEFAULT_EPSILON) -> "ValidMask":
        return cls.from_amplitude(fields.R, epsilon)

    def __and__(self, other: "ValidMask") -> "ValidMask":
        return ValidMask(max(self.epsilon, other.epsilon), self.mask & other.mask)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True, eq=False)
class QhjResiduals:
    hj_residual: np.ndarray
    continuity_residual: np.ndarray
    hj_max: float
    continuity_max: float
    times: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True, eq=False)
class MadelungRun:
    fields: Tuple[HydroFields, ...]
    times: np.ndarray
    clamp_events: int
    dt: float


# --- decomposition -------------------------------------------------------------

def reconstruct_psi(fields: HydroFields, constants: PhysicalConstants = NATURAL_UNITS) -> ComplexField:
    return ComplexField(fields.grid, fields.R * np.exp(1j * fields.S / constants.hbar))


def _spatial_phase(values: np.ndarray, mask: np.ndarray, max_phase_step: float) -> np.ndarray:
    raw = np.angle(values)
    valid = np.flatnonzero(mask)
    unwrapped = np.unwrap(raw[valid])

    adjacent = np.diff(valid) == 1
    jumps = np.abs(np.diff(unwrapped))[adjacent]
    if jumps.size and jumps.max() > max_phase_step:
        worst = int(valid[:-1][adjacent][np.argmax(jumps)])
        raise UnwrapError(
            f"phase step {jumps.max():.3f} rad between samples {worst} and {worst + 1} "
            f"exceeds {max_phase_step:.3f} rad; the phase is under-resolved"
        )

    phase = raw.copy()
    phase[valid] = unwrapped
    off = np.flatnonzero(~mask)
    if off.size:
        # branch of each off-mask sample follows the nearest valid one
        pos = np.searchsorted(valid, off)
        left = valid[np.clip(pos - 1, 0, len(valid) - 1)]
        right = valid[np.clip(pos, 0, len(valid) - 1)]
        nearest = np.where(np.abs(off - left) <= np.abs(right - off), left, right)
        reference = phase[nearest]
        phase[off] = raw[off] + 2.0 * math.pi * np.round((reference - raw[off]) / (2.0 * math.pi))
    return phase


def polar_decompose(snapshots: Sequence[ComplexField],
                    constants: PhysicalConstants = NATURAL_UNITS,
                    epsilon: float = DEFAULT_EPSILON,
                    max_phase_step: float = MAX_PHASE_STEP) -> List[HydroFields]:
    """
    Split each snapshot into R = |psi| and an unwrapped action S.

    S is unwrapped left to right over the valid mask. From the second
    snapshot on, the 2*pi branch is the one minimising the largest change
    against the previous snapshot on the shared mask.
    """
    result: List[HydroFields] = []
    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
    for index, psi in enumerate(snapshots):
        if not norm_squared(psi) > 0.0:
            raise DegenerateStateError(f"snapshot {index} has zero norm")
        R = np.abs(psi.values)
        mask = ValidMask.from_amplitude(R, epsilon).mask
        try:
            phase = _spatial_phase(psi.values, mask, max_phase_step)
        except UnwrapError as e:
            raise UnwrapError(f"snapshot {index}: {e}") from e

        if previous is not None:
            prev_phase, prev_mask = previous
            shared = mask & prev_mask
            if not shared.any():
                shared = mask
            change = phase[shared] - prev_phase[shared]
            centre = -0.5 * (change.max() + change.min())
            phase = phase + 2.0 * math.pi * round(centre / (2.0 * math.pi))
        previous = (phase, mask)
        result.append(HydroFields(psi.grid, R, constants.hbar * phase))
    return result


# --- derived quantities ----------------------------------------------------------

def _fill_off_mask(values: np.ndarray, mask: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Linear interpolation across gaps; constant beyond the outermost valid points."""
    if mask.all():
        return values
    return np.interp(x, x[mask], values[mask])


def action_gradient(fields: HydroFields, mask: Optional[ValidMask] = None,
                    constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
    """
    dS/dx from hbar * Im(psi* psi') / R^2.

    S itself is not periodic, so it is never differentiated spectrally.
    """
    mask = mask or ValidMask.from_fields(fields)
    psi = reconstruct_psi(fields, constants).values
    flux = np.imag(np.conj(psi) * gradient(psi, fields.grid))
    density = fields.R ** 2
    grad = np.zeros(fields.grid.n_points)
    np.divide(constants.hbar * flux, density, out=grad, where=mask.mask)
    return _fill_off_mask(grad, mask.mask, fields.grid.x)


def probability_current(fields: HydroFields, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
    """j = (hbar/m) Im(psi* psi') = R^2 S' / m."""
    psi = reconstruct_psi(fields, constants).values
    return constants.hbar / constants.mass * np.imag(np.conj(psi) * gradient(psi, fields.grid))


def quantum_potential(fields: HydroFields, mask: ValidMask,
                      constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
    """Q = -(hbar^2/2m) R''/R on the mask, 0 elsewhere."""
    if len(mask.mask) != fields.grid.n_points:
        raise ParameterError("mask length does not match the field grid")
    curvature = laplacian(fields.R, fields.grid)
    ratio = np.zeros(fields.grid.n_points)
    np.divide(curvature, fields.R, out=ratio, where=mask.mask)
    return -(constants.hbar ** 2) / (2.0 * constants.mass) * ratio


# --- residuals ---------------------------------------------------------------------

def uniform_spacing(times: Sequence[float], minimum: int) -> float:
    times = np.asarray(times, dtype=float)
    if len(times) < minimum:
        raise InsufficientDataError(f"need at least {minimum} snapshots, got {len(times)}")
    steps = np.diff(times)
    if np.any(steps <= 0.0):
        raise SpacingError("snapshot times must be strictly increasing")
    spacing = float(steps.mean())
    if np.max(np.abs(steps - spacing)) > 1e-9:
        raise SpacingError(
            f"snapshot spacing varies by {np.max(np.abs(steps - spacing)):.3e} (limit 1e-9)"
        )
    return spacing


def qhj_residuals(fields_t: Sequence[HydroFields], times: Sequence[float], V=None,
                  mask: Optional[ValidMask] = None,
                  constants: PhysicalConstants = NATURAL_UNITS) -> QhjResiduals:
    """
    Residuals of both hydrodynamic equations at the interior snapshots.

    Time derivatives are central differences. At each interior time the
    residual is evaluated where the snapshot and both neighbours are valid
    (and, if given, where `mask` is set); elsewhere it is reported as 0.
    """
    if len(fields_t) != len(times):
        raise ParameterError(f"{len(fields_t)} snapshots but {len(times)} times")
    spacing = uniform_spacing(times, 3)
    V = V or FreePotential()
    grid = fields_t[0].grid
    epsilon = mask.epsilon if mask is not None else DEFAULT_EPSILON
    potential = V.values(grid, constants)
    masks = [ValidMask.from_fields(f, epsilon).mask for f in fields_t]

    n_interior = len(fields_t) - 2
    hj = np.zeros((n_interior, grid.n_points))
    continuity = np.zeros((n_interior, grid.n_points))
    combined = np.zeros((n_interior, grid.n_points), dtype=bool)
    for row, i in enumerate(range(1, len(fields_t) - 1)):
        valid = masks[i - 1] & masks[i] & masks[i + 1]
        if mask is not None:
            valid &= mask.mask
        current = fields_t[i]
        here = ValidMask(epsilon, valid)
        dS_dt = (fields_t[i + 1].S - fields_t[i - 1].S) / (2.0 * spacing)
        grad_S = action_gradient(current, here, constants) if valid.any() else np.zeros(grid.n_points)
        Q = quantum_potential(current, here, constants)
        hj_row = dS_dt + grad_S ** 2 / (2.0 * constants.mass) + potential + Q

        drho_dt = (fields_t[i + 1].density - fields_t[i - 1].density) / (2.0 * spacing)
        cont_row = drho_dt + gradient(probability_current(current, constants), grid)

        hj[row] = np.where(valid, hj_row, 0.0)
        continuity[row] = np.where(valid, cont_row, 0.0)
        combined[row] = valid

    hj_max = float(np.max(np.abs(hj))) if combined.any() else 0.0
    continuity_max = float(np.max(np.abs(continuity))) if combined.any() else 0.0
    return QhjResiduals(
        hj_residual=hj,
        continuity_residual=continuity,
        hj_max=hj_max,
        continuity_max=continuity_max,
        times=np.asarray(times, dtype=float)[1:-1],
        mask=combined,
    )


# --- direct integration --------------------------------------------------------

def stable_time_step(grid, constants: PhysicalConstants = NATURAL_UNITS) -> float:
    return STABILITY_FACTOR * grid.dx ** 2 * constants.mass / constants.hbar


def check_node_free(fields: HydroFields, mask: ValidMask) -> None:
    """
    Gate for direct integration: a single contiguous support with no
    interior dip below half of the lower flanking maximum.
    """
    valid = np.flatnonzero(mask.mask)
    if valid.size == 0:
        raise NodeError("empty valid mask")
    if np.any(np.diff(valid) != 1):
        raise NodeError("valid region is split by near-nodes; direct integration needs a node-free state")
    R = fields.R[valid]
    envelope = np.minimum(np.maximum.accumulate(R), np.maximum.accumulate(R[::-1])[::-1])
    dips = R < 0.5 * envelope
    if dips.any():
        where = float(fields.grid.x[valid[np.argmax(dips)]])
        raise NodeError(f"amplitude dips towards a node near x={where:.4g}")


def _continue_tails(rho: np.ndarray, S: np.ndarray, mask: np.ndarray, grid,
                    constants: PhysicalConstants) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rebuild the off-mask samples of (rho, S) from fits over the mask edges.

    ln R continues as a quadratic capped at its edge value. S continues as a
    quadratic unless its slope would pass TAIL_WAVENUMBER_FRACTION of the
    Nyquist limit, in which case it continues linearly with a clipped slope.
    """
    valid = np.flatnonzero(mask)
    if valid.size == len(rho):
        return rho, S
    if valid.size < 3:
        raise NodeError(f"valid region has {valid.size} samples; at least 3 are needed")
    count = min(EDGE_FIT_POINTS, valid.size)
    degree = min(2, count - 1)
    x = grid.x
    log_R = 0.5 * np.log(np.maximum(rho, np.finfo(float).tiny))
    slope_limit = TAIL_WAVENUMBER_FRACTION * grid.k_nyquist * constants.hbar

    rho_out, S_out = np.array(rho, dtype=float), np.array(S, dtype=float)
    sides = (
        (valid[:count], valid[0], np.arange(0, valid[0])),
        (valid[-count:], valid[-1], np.arange(valid[-1] + 1, len(rho))),
    )
    for edge, outer, tail in sides:
        if not tail.size:
            continue
        amplitude = Polynomial.fit(x[edge], log_R[edge], degree)
        rho_out[tail] = np.exp(2.0 * np.minimum(amplitude(x[tail]), log_R[outer]))

        action = Polynomial.fit(x[edge], S_out[edge], degree)
        if np.max(np.abs(action.deriv()(x[tail]))) <= slope_limit:
            S_out[tail] = action(x[tail])
        else:
            slope = float(np.clip(action.deriv()(x[outer]), -slope_limit, slope_limit))
            S_out[tail] = S_out[outer] + slope * (x[tail] - x[outer])
    return rho_out, S_out


def _rates(rho: np.ndarray, S: np.ndarray, grid, potential: np.ndarray, mask: ValidMask,
           constants: PhysicalConstants) -> Tuple[np.ndarray, np.ndarray]:
    """(d rho/dt, dS/dt) on the mask; zero elsewhere."""
    floor = (STAGE_FLOOR * mask.epsilon) ** 2 * float(np.max(rho))
    rho = np.where(mask.mask, np.maximum(rho, floor), rho)
    rho, S = _continue_tails(rho, S, mask.mask, grid, constants)
    R = np.sqrt(np.maximum(rho, 0.0))

    psi = R * np.exp(1j * S / constants.hbar)
    flux = np.imag(np.conj(psi) * gradient(psi, grid))
    drho_dt = -constants.hbar / constants.mass * gradient(flux, grid)
    grad_S = np.zeros(grid.n_points)
    np.divide(constants.hbar * flux, rho, out=grad_S, where=mask.mask)
    Q = quantum_potential(HydroFields(grid, R, S), mask, constants)
    dS_dt = -(grad_S ** 2 / (2.0 * constants.mass) + potential + Q)
    return np.where(mask.mask, drho_dt, 0.0), np.where(mask.mask, dS_dt, 0.0)


def _advance(fields: HydroFields, V, dt: float, mask: ValidMask,
             constants: PhysicalConstants) -> Tuple[HydroFields, int]:
    grid = fields.grid
    limit = stable_time_step(grid, constants)
    if not 0.0 < dt <= limit * (1.0 + 1e-12):
        raise ParameterError(f"Madelung step dt={dt} outside (0, {limit:.6g}] (0.2*dx^2*m/hbar)")
    check_node_free(fields, mask)
    potential = (V or FreePotential()).values(grid, constants)

    rho0, S0 = _continue_tails(fields.density, fields.S, mask.mask, grid, constants)
    k1 = _rates(rho0, S0, grid, potential, mask, constants)
    k2 = _rates(rho0 + 0.5 * dt * k1[0], S0 + 0.5 * dt * k1[1], grid, potential, mask, constants)
    k3 = _rates(rho0 + 0.5 * dt * k2[0], S0 + 0.5 * dt * k2[1], grid, potential, mask, constants)
    k4 = _rates(rho0 + dt * k3[0], S0 + dt * k3[1], grid, potential, mask, constants)
    rho = rho0 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    S = S0 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])

    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(S))):
        raise InstabilityError("Madelung step produced non-finite values")
    scale = max(float(np.max(np.abs(S0))), constants.hbar)
    if float(np.max(np.abs(S))) > GROWTH_LIMIT * scale:
        raise InstabilityError(f"action grew beyond {GROWTH_LIMIT:g}x its previous size in one step")

    negative = mask.mask & (rho < 0.0)
    clamps = int(np.count_nonzero(negative))
    rho = np.where(negative, 0.0, rho)
    rho, S = _continue_tails(rho, S, mask.mask, grid, constants)
    return HydroFields(grid, np.sqrt(np.maximum(rho, 0.0)), S), clamps


def madelung_step(fields: HydroFields, V, dt: float, mask: ValidMask,
                  constants: PhysicalConstants = NATURAL_UNITS) -> HydroFields:
    """One RK4 step of (R^2, S) with spectral spatial derivatives."""
    advanced, clamps = _advance(fields, V, dt, mask, constants)
    if clamps:
        logger.debug(f"Madelung step clamped {clamps} negative densities")
    return advanced


def madelung_evolve(fields0: HydroFields, V, t_final: float, dt_max: Optional[float] = None,
                    epsilon: float = DEFAULT_EPSILON, record_every: int = 1,
                    constants: PhysicalConstants = NATURAL_UNITS) -> MadelungRun:
    """
    Integrate from t=0 to t_final with equal steps no larger than dt_max
    (default: the stability limit). The mask is rebuilt every step.
    """
    if not t_final > 0.0:
        raise ParameterError(f"t_final must be positive (got {t_final})")
    limit = stable_time_step(fields0.grid, constants)
    dt_max = min(dt_max or limit, limit)
    n_steps = int(math.ceil(t_final / dt_max - 1e-9))
    dt = t_final / n_steps

    fields = fields0
    recorded = [fields0]
    times = [0.0]
    clamp_events = 0
    for n in range(n_steps):
        mask = ValidMask.from_fields(fields, epsilon)
        fields, clamps = _advance(fields, V, dt, mask, constants)
        clamp_events += clamps
        step = n + 1
        if step % record_every == 0 or step == n_steps:
            recorded.append(fields)
            times.append(step * dt)
    if clamp_events:
        logger.warning(json.dumps({
            "event": "madelung.clamp",
            "clamp_events": clamp_events,
            "steps": n_steps,
        }))
    return MadelungRun(fields=tuple(recorded), times=np.array(times), clamp_events=clamp_events, dt=dt)
