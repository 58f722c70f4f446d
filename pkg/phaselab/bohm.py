"""
Bohmian trajectories of the velocity field v = S'/m.

Along a trajectory the action is tracked twice: sampled from the S field
at each snapshot, and integrated as the Lagrangian m v^2/2 - V - Q. The
hydrodynamic equations force the two to agree.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from phaselab.errors import EscapeError, InstabilityError, InsufficientDataError, ParameterError
from phaselab.fields import ComplexField, HydroFields
from phaselab.madelung import DEFAULT_EPSILON, ValidMask, action_gradient, quantum_potential, uniform_spacing
from phaselab.models.physics import NATURAL_UNITS, FreePotential, PhysicalConstants

logger = logging.getLogger(__name__)

ESCAPE_MARGIN_CELLS = 5
RTOL = 1e-9
ATOL = 1e-11


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    action: np.ndarray
    integrated_action: np.ndarray

    @property
    def action_discrepancy(self) -> float:
        return float(np.max(np.abs(self.action - self.integrated_action)))


def bohm_velocity(fields: HydroFields, constants: PhysicalConstants = NATURAL_UNITS,
                  mask: Optional[ValidMask] = None) -> np.ndarray:
    return action_gradient(fields, mask, constants) / constants.mass


class _SnapshotFlow:
    """Per-snapshot splines of velocity, Lagrangian and action over the valid points."""

    def __init__(self, fields_t: Sequence[HydroFields], V, epsilon: float,
                 constants: PhysicalConstants):
        grid = fields_t[0].grid
        potential = V.values(grid, constants)
        x = grid.x
        self.velocity: List[CubicSpline] = []
        self.lagrangian: List[CubicSpline] = []
        self.action: List[CubicSpline] = []
        for fields in fields_t:
            mask = ValidMask.from_fields(fields, epsilon)
            valid = mask.mask
            if np.count_nonzero(valid) < 4:
                raise InsufficientDataError("too few valid points to spline the velocity field")
            v = bohm_velocity(fields, constants, mask)
            Q = quantum_potential(fields, mask, constants)
            lagrangian = 0.5 * constants.mass * v ** 2 - potential - Q
            self.velocity.append(CubicSpline(x[valid], v[valid]))
            self.lagrangian.append(CubicSpline(x[valid], lagrangian[valid]))
            self.action.append(CubicSpline(x[valid], fields.S[valid]))

    @staticmethod
    def _blend(splines: List[CubicSpline], index: int, weight: float, x: float) -> float:
        value = float(splines[index](x))
        if weight > 0.0:
            value = (1.0 - weight) * value + weight * float(splines[index + 1](x))
        return value

    def rates(self, index: int, weight: float, x: float):
        return (
            self._blend(self.velocity, index, weight, x),
            self._blend(self.lagrangian, index, weight, x),
        )


def integrate_trajectory(fields_t: Sequence[HydroFields], times: Sequence[float], x_start: float,
                         constants: PhysicalConstants = NATURAL_UNITS, V=None,
                         epsilon: float = DEFAULT_EPSILON,
                         flow: Optional[_SnapshotFlow] = None) -> Trajectory:
    """
    Integrate (x, A) with dx/dt = v and dA/dt = m v^2/2 - V - Q through the
    snapshot sequence using solve_ivp (RK45, steps no longer than the
    snapshot spacing). Fields are cubic splines in x and linear in t
    between snapshots.
    """
    if len(fields_t) != len(times):
        raise ParameterError(f"{len(fields_t)} snapshots but {len(times)} times")
    h = uniform_spacing(times, 2)
    times = np.asarray(times, dtype=float)
    grid = fields_t[0].grid
    margin = ESCAPE_MARGIN_CELLS * grid.dx
    if not grid.contains(x_start, margin):
        raise ParameterError(f"x_start={x_start} is outside the grid interior")
    flow = flow or _SnapshotFlow(fields_t, V or FreePotential(), epsilon, constants)
    last = len(times) - 2

    def rhs(t, state):
        index = min(max(int((t - times[0]) // h), 0), last)
        weight = min(max((t - times[index]) / h, 0.0), 1.0)
        return flow.rates(index, weight, state[0])

    def escaped(t, state):
        return min(state[0] - grid.x_min - margin, grid.x_max - margin - state[0])

    escaped.terminal = True
    escaped.direction = -1

    start_action = float(flow.action[0](x_start))
    solution = solve_ivp(rhs, (times[0], times[-1]), [x_start, start_action], method="RK45",
                         t_eval=times, max_step=h, rtol=RTOL, atol=ATOL, events=escaped)
    if solution.status == 1:
        t_hit, x_hit = float(solution.t_events[0][0]), float(solution.y_events[0][0][0])
        raise EscapeError(f"trajectory from x={x_start} reached x={x_hit:.6g} at t={t_hit:.6g}")
    if not solution.success:
        raise InstabilityError(f"trajectory from x={x_start} failed: {solution.message}")

    positions, integrated = solution.y
    return Trajectory(
        times=times,
        positions=positions,
        velocities=np.array([flow.rates(k, 0.0, x)[0] for k, x in enumerate(positions)]),
        action=np.array([float(flow.action[k](x)) for k, x in enumerate(positions)]),
        integrated_action=integrated,
    )


def trajectory_ensemble(fields_t: Sequence[HydroFields], times: Sequence[float],
                        starts: Sequence[float], constants: PhysicalConstants = NATURAL_UNITS,
                        V=None, epsilon: float = DEFAULT_EPSILON) -> List[Trajectory]:
    """Trajectories for several starts sharing one set of splines."""
    if not len(starts):
        raise ParameterError("no trajectory starts given")
    flow = _SnapshotFlow(fields_t, V or FreePotential(), epsilon, constants)
    return [
        integrate_trajectory(fields_t, times, x, constants, V, epsilon, flow=flow)
        for x in starts
    ]


def ordering_preserved(trajectories: Sequence[Trajectory]) -> bool:
    """True if trajectories never cross (Bohmian flow is single valued in 1-D)."""
    positions = np.array([t.positions for t in trajectories])
    order = np.argsort(positions[:, 0], kind="stable")
    ordered = positions[order]
    return bool(np.all(np.diff(ordered, axis=0) >= 0.0))


def born_quantile_starts(psi: ComplexField, count: int) -> np.ndarray:
    """Positions at the (j + 1/2)/count quantiles of |psi|^2."""
    if count < 1:
        raise ParameterError(f"quantile count must be >= 1 (got {count})")
    return _quantiles(psi, (np.arange(count) + 0.5) / count)


def _quantiles(psi: ComplexField, levels: np.ndarray) -> np.ndarray:
    density = psi.density
    cdf = np.cumsum(density) - 0.5 * density
    cdf = cdf / np.sum(density)
    return np.interp(levels, cdf, psi.grid.x)


def born_quantile_error(positions: Sequence[float], psi: ComplexField) -> float:
    """
    Largest distance between sorted ensemble positions and the matching
    |psi|^2 quantiles; stays small if the flow carries the Born density.
    """
    positions = np.sort(np.asarray(positions, dtype=float))
    levels = (np.arange(len(positions)) + 0.5) / len(positions)
    return float(np.max(np.abs(positions - _quantiles(psi, levels))))
