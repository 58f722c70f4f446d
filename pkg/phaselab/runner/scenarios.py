"""
Scenario executors, one per config kind.

Each executor writes its tables as soon as they exist (so a failure later
in the run leaves them behind) and returns the headline metrics for the
manifest.
"""
import logging
import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from phaselab.bohm import born_quantile_error, born_quantile_starts, ordering_preserved, trajectory_ensemble
from phaselab.config import RuntimeSettings
from phaselab.dressed import TwoLevelState, dressed_trajectory, phase_scan, propagate
from phaselab.fields import HydroFields, coherent_state, harmonic_ground_state, make_gaussian, position_width
from phaselab.interference import (
    fringe_analysis,
    fringe_fit_line,
    phase_to_fringe_scan,
    predicted_fringe_spacing,
    predicted_visibility,
    two_packet_state,
)
from phaselab.madelung import ValidMask, madelung_evolve, polar_decompose, qhj_residuals
from phaselab.models.physics import FreePotential, HarmonicPotential
from phaselab.runner.metrics import RunMetrics
from phaselab.runner.outputs import RunDirectory
from phaselab.runner import plots
from phaselab.schrodinger import analytic_free_width, evolve, expectation_energy, expectation_position

logger = logging.getLogger(__name__)

Headline = Dict[str, object]


class RunContext:
    """What an executor may touch: the run directory, metrics and settings."""

    def __init__(self, run_dir: RunDirectory, metrics: RunMetrics, settings: RuntimeSettings,
                 emit_svg: bool = True):
        self.run_dir = run_dir
        self.metrics = metrics
        self.settings = settings
        self.emit_svg = emit_svg

    def table(self, filename: str, header: Sequence[str], columns: Sequence[Sequence], role: str) -> None:
        path = self.run_dir.write_csv(filename, header, columns, role)
        self.metrics.record_output(role, path.stat().st_size)

    def plot(self, filename: str, draw: Callable, *args, **kwargs) -> None:
        if not self.emit_svg:
            return
        try:
            draw(self.run_dir.path / filename, *args, **kwargs)
        except Exception as e:
            logger.warning(f"Skipping plot {filename}: {type(e).__name__}: {e}")
            return
        path = self.run_dir.attach(filename, "plot")
        self.metrics.record_output("plot", path.stat().st_size)


EXECUTORS: Dict[str, Callable[[object, RunContext], Headline]] = {}


def executor(kind: str):
    def register(func):
        EXECUTORS[kind] = func
        return func
    return register


def _uniform_snapshots(times: np.ndarray, snapshots: Sequence) -> Tuple[np.ndarray, List]:
    """Drop a trailing snapshot whose spacing differs from the stride."""
    if len(times) > 2 and not math.isclose(times[-1] - times[-2], times[1] - times[0],
                                           rel_tol=1e-9, abs_tol=1e-12):
        return times[:-1], list(snapshots[:-1])
    return times, list(snapshots)


def _field_columns(times: np.ndarray, values: Sequence[np.ndarray]) -> Tuple[List[str], List]:
    return [f"t={t:.6g}" for t in times], [np.asarray(v) for v in values]


# --- Schrodinger reference scenarios ------------------------------------------

@executor("free_gaussian")
def run_free_gaussian(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    psi0 = make_gaussian(grid, p.x0, p.sigma0, p.k0)
    result = evolve(psi0, FreePotential(), p.t_final, p.dt, scenario.output.snapshot_every,
                    constants, ctx.settings.snapshot_cap)

    sigma = [position_width(psi) for psi in result.snapshots]
    analytic = [analytic_free_width(p.sigma0, t, constants) for t in result.times]
    ctx.table(
        "timeseries.csv",
        ["time", "x_mean", "sigma", "sigma_analytic", "norm"],
        [result.times, [expectation_position(psi) for psi in result.snapshots], sigma, analytic,
         [float(np.sum(psi.density) * grid.dx) for psi in result.snapshots]],
        "timeseries",
    )
    names, columns = _field_columns(result.times, [psi.density for psi in result.snapshots])
    ctx.table("density.csv", ["x"] + names, [grid.x] + columns, "field")
    ctx.plot("sigma.svg", plots.line_plot, result.times, {"split-step": sigma, "analytic": analytic},
             "t", "sigma", "Free Gaussian width")
    ctx.plot("density.svg", plots.heat_plot, grid.x, result.times,
             np.array([psi.density for psi in result.snapshots]), "x", "|psi|^2")
    return {
        "sigma_final": sigma[-1],
        "sigma_analytic_final": analytic[-1],
        "sigma_error": abs(sigma[-1] - analytic[-1]),
        "norm_drift": result.norm_drift,
    }


@executor("harmonic_stationary")
def run_harmonic_stationary(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    potential = HarmonicPotential(omega=p.omega)
    psi0 = harmonic_ground_state(grid, p.omega, constants)
    result = evolve(psi0, potential, p.t_final, p.dt, scenario.output.snapshot_every,
                    constants, ctx.settings.snapshot_cap)
    modulus_error = [float(np.max(np.abs(np.abs(psi.values) - np.abs(psi0.values))))
                     for psi in result.snapshots]
    energy = expectation_energy(result.psi_final, potential, constants)
    ctx.table("modulus.csv", ["time", "modulus_deviation"], [result.times, modulus_error], "timeseries")

    headline: Headline = {
        "modulus_deviation": max(modulus_error),
        "energy": energy,
        "energy_analytic": 0.5 * constants.hbar * p.omega,
        "norm_drift": result.norm_drift,
    }
    times, snapshots = _uniform_snapshots(result.times, result.snapshots)
    if len(times) >= 3:
        mask = ValidMask.from_amplitude(np.abs(psi0.values), p.epsilon)
        oracle = qhj_residuals(polar_decompose(snapshots, constants, p.epsilon), times, potential,
                               mask, constants)
        e0 = 0.5 * constants.hbar * p.omega
        exact_fields = [HydroFields(grid, np.abs(psi0.values), np.full(grid.n_points, -e0 * t))
                        for t in times]
        exact = qhj_residuals(exact_fields, times, potential, mask, constants)
        ctx.table(
            "residuals.csv",
            ["time", "hj_max", "continuity_max", "hj_max_analytic", "continuity_max_analytic"],
            [oracle.times,
             np.max(np.abs(oracle.hj_residual), axis=1),
             np.max(np.abs(oracle.continuity_residual), axis=1),
             np.max(np.abs(exact.hj_residual), axis=1),
             np.max(np.abs(exact.continuity_residual), axis=1)],
            "timeseries",
        )
        headline.update({
            "hj_max": oracle.hj_max,
            "continuity_max": oracle.continuity_max,
            "hj_max_analytic": exact.hj_max,
            "continuity_max_analytic": exact.continuity_max,
        })
    else:
        logger.warning("Fewer than 3 uniformly spaced snapshots; residuals skipped")
    return headline


@executor("coherent_state")
def run_coherent_state(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    psi0 = coherent_state(grid, p.x0, p.omega, constants)
    result = evolve(psi0, HarmonicPotential(omega=p.omega), p.t_final, p.dt,
                    scenario.output.snapshot_every, constants, ctx.settings.snapshot_cap)
    centre = np.array([expectation_position(psi) for psi in result.snapshots])
    classical = p.x0 * np.cos(p.omega * result.times)
    ctx.table(
        "timeseries.csv",
        ["time", "x_mean", "x_classical", "sigma"],
        [result.times, centre, classical, [position_width(psi) for psi in result.snapshots]],
        "timeseries",
    )
    ctx.plot("center.svg", plots.line_plot, result.times, {"<x>": centre, "x0 cos wt": classical},
             "t", "x", "Coherent state centre")
    return {
        "x_mean_final": float(centre[-1]),
        "x_classical_final": float(classical[-1]),
        "max_center_error": float(np.max(np.abs(centre - classical))),
        "norm_drift": result.norm_drift,
    }


# --- interference -------------------------------------------------------------

@executor("two_packet_interference")
def run_two_packet(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    psi0 = two_packet_state(grid, p.separation, p.sigma0, p.delta_phi, p.amplitude_ratio)
    result = evolve(psi0, FreePotential(), p.t_free, p.dt, scenario.output.snapshot_every,
                    constants, ctx.settings.snapshot_cap)
    final = result.psi_final
    ctx.table("intensity.csv", ["x", "intensity_initial", "intensity_final"],
              [grid.x, psi0.density, final.density], "field")
    ctx.plot("intensity.svg", plots.line_plot, grid.x, {"t=0": psi0.density, "t_free": final.density},
             "x", "|psi|^2", "Two-packet interference")

    predicted = predicted_fringe_spacing(p.separation, p.sigma0, p.t_free, constants)
    analysis = fringe_analysis(final, predicted)
    return {
        "fringe_spacing": analysis.fringe_spacing,
        "fringe_spacing_predicted": predicted,
        "phase_shift": analysis.phase_shift,
        "visibility": analysis.visibility,
        "visibility_predicted": predicted_visibility(p.amplitude_ratio),
        "center_intensity": analysis.center_intensity,
    }


@executor("phase_scan_interference")
def run_phase_scan_interference(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    pairs = phase_to_fringe_scan(grid, p.separation, p.sigma0, p.t_free, p.phis, p.dt,
                                 p.mode, p.kick_time, constants=constants)
    applied = [a for a, _ in pairs]
    extracted = [e for _, e in pairs]
    ctx.table("fringe_scan.csv", ["applied_phase", "extracted_phase"], [applied, extracted], "scan")
    ctx.plot("fringe_scan.svg", plots.line_plot, applied, {"extracted": extracted, "applied": applied},
             "applied phase (rad)", "fringe shift (rad)", f"Fringe shift ({p.mode})")
    headline: Headline = {"max_phase_error": max(abs(e - a) for a, e in pairs)}
    if len(pairs) >= 2:
        slope, offset = fringe_fit_line(pairs)
        headline.update({"fringe_slope": slope, "fringe_offset": offset})
    return headline


# --- two-level drive ------------------------------------------------------------

def _dressed_columns(states, pulse, constants):
    dressed = dressed_trajectory(states, pulse, constants)
    return (
        [s.t for s in states],
        [s.p_g for s in states],
        [s.p_e for s in states],
        [d.p_plus for d in dressed],
        [d.p_minus for d in dressed],
        [d.theta for d in dressed],
        [math.atan2(d.a_plus.imag, d.a_plus.real) for d in dressed],
        [math.atan2(d.a_minus.imag, d.a_minus.real) for d in dressed],
    )


DRESSED_HEADER = ["time", "p_g", "p_e", "p_plus", "p_minus", "theta", "phase_plus", "phase_minus"]


@executor("rabi_pulse")
def run_rabi_pulse(scenario, ctx: RunContext) -> Headline:
    p, constants = scenario.params, scenario.physics
    state0 = TwoLevelState.ground() if p.initial == "ground" else TwoLevelState.excited()
    states = propagate(state0, p.pulse, p.t_final, p.dt)
    columns = _dressed_columns(states, p.pulse, constants)
    ctx.table("populations.csv", DRESSED_HEADER, columns, "timeseries")
    ctx.plot("populations.svg", plots.line_plot, columns[0], {"P_g": columns[1], "P_e": columns[2]},
             "t", "population", "Bare populations")
    norms = np.array(columns[1]) + np.array(columns[2])
    return {
        "p_e_final": states[-1].p_e,
        "p_e_max": max(columns[2]),
        "norm_error": float(np.max(np.abs(norms - 1.0))),
    }


@executor("phase_jump_scan")
def run_phase_jump_scan(scenario, ctx: RunContext) -> Headline:
    p = scenario.params
    results = phase_scan(p.pulse, p.jump_time, p.jump_values, p.t_final, p.dt)
    values = [v for v, _ in results]
    populations = [pe for _, pe in results]
    ctx.table("phase_scan.csv", ["jump_value", "p_e"], [values, populations], "scan")
    ctx.plot("phase_scan.svg", plots.line_plot, values, {"P_e": populations},
             "phase jump (rad)", "final P_e", "Population against phase jump")
    return {
        "p_e_min": min(populations),
        "p_e_max": max(populations),
        "p_e_range": max(populations) - min(populations),
    }


@executor("adiabatic_ramp")
def run_adiabatic_ramp(scenario, ctx: RunContext) -> Headline:
    p, constants = scenario.params, scenario.physics
    states = propagate(TwoLevelState.ground(), p.pulse, p.t_final, p.dt)
    columns = _dressed_columns(states, p.pulse, constants)
    ctx.table("dressed.csv", DRESSED_HEADER, columns, "timeseries")
    ctx.plot("dressed.svg", plots.line_plot, columns[0],
             {"P_e": columns[2], "P_plus": columns[3], "P_minus": columns[4]},
             "t", "population", "Bare and dressed populations")
    p_plus = np.array(columns[3])
    p_e = np.array(columns[2])
    return {
        "dressed_change": float(np.max(np.abs(p_plus - p_plus[0]))),
        "bare_change": float(np.max(np.abs(p_e - p_e[0]))),
        "p_e_final": float(p_e[-1]),
        "p_plus_final": float(p_plus[-1]),
    }


# --- hydrodynamics ----------------------------------------------------------------

@executor("madelung_direct")
def run_madelung_direct(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    psi0 = make_gaussian(grid, p.x0, p.sigma0, p.k0)
    oracle = evolve(psi0, FreePotential(), p.t_final, p.oracle_dt, scenario.output.snapshot_every,
                    constants, ctx.settings.snapshot_cap)
    oracle_fields = polar_decompose(oracle.snapshots, constants, p.epsilon)[-1]

    start = polar_decompose([psi0], constants, p.epsilon)[0]
    run = madelung_evolve(start, FreePotential(), p.t_final, p.dt_max, p.epsilon,
                          record_every=10 ** 9, constants=constants)
    ctx.metrics.clamp_events.inc(run.clamp_events)
    direct = run.fields[-1]
    mask = ValidMask.from_fields(oracle_fields, p.epsilon).mask
    ctx.table(
        "comparison.csv",
        ["x", "R_madelung", "R_oracle", "S_madelung", "S_oracle", "Phi_madelung", "Phi_oracle", "valid"],
        [grid.x, direct.R, oracle_fields.R, direct.S, oracle_fields.S,
         direct.material_phase(constants), oracle_fields.material_phase(constants), mask],
        "field",
    )
    ctx.plot("comparison.svg", plots.line_plot, grid.x,
             {"R direct": direct.R, "R oracle": oracle_fields.R}, "x", "R", "Direct vs oracle amplitude")
    return {
        "max_dR": float(np.max(np.abs(direct.R - oracle_fields.R)[mask])),
        "max_dS": float(np.max(np.abs(direct.S - oracle_fields.S)[mask])),
        "clamp_events": run.clamp_events,
        "madelung_dt": run.dt,
    }


@executor("trajectory_ensemble")
def run_trajectory_ensemble(scenario, ctx: RunContext) -> Headline:
    p, grid, constants = scenario.params, scenario.grid, scenario.physics
    psi0 = make_gaussian(grid, p.x0, p.sigma0, p.k0)
    result = evolve(psi0, p.potential, p.t_final, p.dt, scenario.output.snapshot_every,
                    constants, ctx.settings.snapshot_cap)
    times, snapshots = _uniform_snapshots(result.times, result.snapshots)
    fields = polar_decompose(snapshots, constants, p.epsilon)

    starts = list(p.starts)
    if p.quantile_count:
        starts += list(born_quantile_starts(psi0, p.quantile_count))
    trajectories = trajectory_ensemble(fields, times, starts, constants, p.potential, p.epsilon)

    labels = [f"x{i}" for i in range(len(trajectories))]
    ctx.table("trajectories.csv", ["time"] + labels, [times] + [t.positions for t in trajectories],
              "trajectories")
    action_header, action_columns = ["time"], [times]
    for label, trajectory in zip(labels, trajectories):
        action_header += [f"S_{label}", f"A_{label}"]
        action_columns += [trajectory.action, trajectory.integrated_action]
    ctx.table("action.csv", action_header, action_columns, "trajectories")
    ctx.plot("trajectories.svg", plots.line_plot, times,
             {label: t.positions for label, t in zip(labels, trajectories)}, "t", "x", "Bohmian trajectories")

    headline: Headline = {
        "ordering_preserved": ordering_preserved(trajectories),
        "max_action_discrepancy": max(t.action_discrepancy for t in trajectories),
        "x_final_first": float(trajectories[0].positions[-1]),
    }
    if p.quantile_count:
        quantile_positions = [t.positions[-1] for t in trajectories[len(p.starts):]]
        headline["born_quantile_error"] = born_quantile_error(quantile_positions, snapshots[-1])
    return headline
