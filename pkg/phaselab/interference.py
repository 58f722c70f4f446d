"""
Two-packet matter-wave interference and fringe-phase read-out.

A relative phase on one packet shifts the fringes that appear once the
packets overlap. fringe_analysis reads that shift back off |psi|^2.
"""
import json
import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy.optimize import OptimizeWarning, curve_fit, minimize_scalar

from phaselab.errors import NoFringeError, ParameterError, PreparationError
from phaselab.fields import ComplexField, normalize, spectral_interpolate
from phaselab.models.physics import NATURAL_UNITS, FreePotential, Grid1D, PhaseKick, PhysicalConstants
from phaselab.schrodinger import evolve

logger = logging.getLogger(__name__)

SEPARATION_MIN_SIGMAS = 6.0
BOUNDARY_MIN_SIGMAS = 5.0
KAPPA_SEARCH = 0.3
FIT_FLOOR = 1e-6
FIT_MAX_EVALUATIONS = 4000
PEAK_TO_BACKGROUND = 3.0
MIN_RELATIVE_PEAK = 1e-6


@dataclass(frozen=True)
class FringeAnalysis:
    fringe_spacing: float
    phase_shift: float
    visibility: float
    center_intensity: float
    center: float
    seed_spacing: float


def two_packet_state(grid: Grid1D, separation: float, sigma0: float, delta_phi: float = 0.0,
                     amplitude_ratio: float = 1.0) -> ComplexField:
    """
    (psi_L + r e^{i delta_phi} psi_R) / norm with real Gaussians at
    grid.center -/+ separation/2.
    """
    if sigma0 <= 0.0 or amplitude_ratio <= 0.0:
        raise PreparationError("sigma0 and amplitude_ratio must be positive")
    if separation < SEPARATION_MIN_SIGMAS * sigma0:
        raise PreparationError(
            f"separation={separation} below {SEPARATION_MIN_SIGMAS:g}*sigma0; packets would overlap"
        )
    centers = (grid.center - 0.5 * separation, grid.center + 0.5 * separation)
    for c in centers:
        if not grid.contains(c, BOUNDARY_MIN_SIGMAS * sigma0):
            raise PreparationError(f"packet at x={c} is closer than {BOUNDARY_MIN_SIGMAS:g}*sigma0 to the boundary")
    x = grid.x
    left = np.exp(-((x - centers[0]) ** 2) / (4.0 * sigma0 ** 2))
    right = np.exp(-((x - centers[1]) ** 2) / (4.0 * sigma0 ** 2))
    values = left + amplitude_ratio * np.exp(1j * delta_phi) * right
    return normalize(ComplexField(grid, values))


def predicted_fringe_spacing(separation: float, sigma0: float, t: float,
                             constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """
    Exact fringe spacing of two freely spread Gaussians:
    2 pi / kappa with kappa = tau d / (2 sigma0^2 (1 + tau^2)), tau = hbar t / (2 m sigma0^2).
    """
    tau = constants.hbar * t / (2.0 * constants.mass * sigma0 ** 2)
    if tau <= 0.0:
        raise ParameterError("fringes need t > 0")
    kappa = tau * separation / (2.0 * sigma0 ** 2 * (1.0 + tau ** 2))
    return 2.0 * math.pi / kappa


def far_field_fringe_spacing(separation: float, t: float,
                             constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """Two-point-source limit 2 pi hbar t / (m d)."""
    return 2.0 * math.pi * constants.hbar * t / (constants.mass * separation)


def predicted_visibility(amplitude_ratio: float) -> float:
    return 2.0 * amplitude_ratio / (1.0 + amplitude_ratio ** 2)


def _spectral_seed(x: np.ndarray, intensity: np.ndarray, center: float, hint: float) -> float:
    """Wavenumber of the strongest fringe component near 2 pi / hint."""
    window = np.abs(x - center) <= 2.0 * hint
    xs, ys = x[window], intensity[window]
    if xs.size < 16:
        raise NoFringeError("analysis window holds too few samples")
    half = 0.5 * (xs[-1] - xs[0])
    u = (xs - 0.5 * (xs[-1] + xs[0])) / half
    trend = legendre.legval(u, legendre.legfit(u, ys, 2))
    taper = np.hanning(xs.size)
    n_fft = 16 * xs.size
    dx = xs[1] - xs[0]
    spectrum = np.abs(np.fft.rfft((ys - trend) * taper, n=n_fft))
    k = 2.0 * math.pi * np.fft.rfftfreq(n_fft, d=dx)
    dc = abs(float(np.sum(ys * taper)))

    k_hint = 2.0 * math.pi / hint
    # at least three fringes across the window
    k_low = max(0.25 * k_hint, 3.0 * 2.0 * math.pi / (xs[-1] - xs[0]))
    band = np.flatnonzero((k >= k_low) & (k <= 4.0 * k_hint))
    if band.size < 3:
        raise NoFringeError("hint leaves no usable band in the spectrum")
    magnitudes = spectrum[band]
    peak = int(np.argmax(magnitudes))
    background = float(np.median(magnitudes))
    if peak in (0, band.size - 1):
        raise NoFringeError("intensity spectrum has no interior peak near the hinted spacing")
    if magnitudes[peak] < PEAK_TO_BACKGROUND * background or magnitudes[peak] < MIN_RELATIVE_PEAK * dc:
        raise NoFringeError(
            f"fringe peak {magnitudes[peak]:.3e} not above background {background:.3e}"
        )
    return float(k[band[peak]])


def _fringe_components(x: np.ndarray, intensity: np.ndarray, dx: float, center: float,
                       kappa: float) -> Tuple[float, float]:
    """Cosine and sine projections of the intensity at wavenumber kappa about `center`."""
    phase = kappa * (x - center)
    return float(np.sum(intensity * np.cos(phase)) * dx), float(np.sum(intensity * np.sin(phase)) * dx)


def _two_packet_intensity(u: np.ndarray, amplitude: float, alpha: float, beta: float, log_ratio: float,
                          coherence: float, kappa: float, delta: float) -> np.ndarray:
    """
    |psi_L + r e^{i delta} psi_R|^2 for two freely spread Gaussians, about
    their midpoint: A e^{-2 alpha u^2} (cosh(beta u + ln r) + g cos(kappa u - delta)).
    """
    envelope = -2.0 * alpha * u ** 2
    background = 0.5 * (np.exp(envelope + beta * u + log_ratio) + np.exp(envelope - beta * u - log_ratio))
    return amplitude * (background + coherence * np.exp(envelope) * np.cos(kappa * u - delta))


def _moment_seed(u: np.ndarray, intensity: np.ndarray, dx: float, kappa: float) -> List[float]:
    """
    Starting parameters for _two_packet_intensity from intensity moments.

    The fringe term alone carries e^{i kappa u}, so its width comes from the
    u^2-weighted projection; the rest of the second moment is the packet
    offset, and the first moment gives the amplitude ratio.
    """
    wave = np.exp(1j * kappa * u)
    z0 = complex(np.sum(intensity * wave) * dx)
    z2 = complex(np.sum(u ** 2 * intensity * wave) * dx)
    total = float(np.sum(intensity) * dx)
    if abs(z0) == 0.0 or not total > 0.0:
        raise NoFringeError("no fringe amplitude at the refined wavenumber")
    width2 = (z2 / z0).real
    if not width2 > 0.0:
        raise NoFringeError("fringe envelope width is not positive")
    offset2 = max(float(np.sum(u ** 2 * intensity) * dx) / total - width2, 0.0)
    offset = math.sqrt(offset2)
    alpha = 1.0 / (4.0 * width2)
    beta = offset / width2
    tilt = float(np.sum(u * intensity) * dx) / total / offset if offset > 0.0 else 0.0
    log_ratio = math.atanh(min(max(tilt, -0.99), 0.99))
    gauss = math.sqrt(math.pi / (2.0 * alpha))
    amplitude = total / (gauss * math.exp(beta ** 2 / (8.0 * alpha)) * math.cosh(log_ratio))
    coherence = 2.0 * abs(z0) / (amplitude * gauss)
    return [amplitude, alpha, beta, log_ratio, coherence, kappa, math.atan2(z0.imag, z0.real)]


def fringe_analysis(psi: ComplexField, expected_spacing_hint: float,
                    center: Optional[float] = None) -> FringeAnalysis:
    """
    Read spacing, shift and visibility off |psi|^2.

    The wavenumber kappa is first taken where the projection power
    |sum I e^{i kappa (x - c)}|^2 peaks, refined from the spectral seed,
    about the centre c (default: grid midpoint). Moments of the intensity
    then seed a least-squares fit of the two-packet pattern
    A e^{-2 alpha u^2} (cosh(beta u + ln r) + g cos(kappa u - delta)),
    u = x - c. The visibility at c is g / cosh(ln r), i.e. 2r/(1+r^2) for
    fully coherent packets.
    """
    if not expected_spacing_hint > 0.0:
        raise ParameterError(f"spacing hint must be positive (got {expected_spacing_hint})")
    grid = psi.grid
    center = grid.center if center is None else center
    x = grid.x
    intensity = psi.density

    seed = _spectral_seed(x, intensity, center, expected_spacing_hint)
    low, high = (1.0 - KAPPA_SEARCH) * seed, (1.0 + KAPPA_SEARCH) * seed

    def negative_power(kappa: float) -> float:
        C, S = _fringe_components(x, intensity, grid.dx, center, kappa)
        return -(C * C + S * S)

    refined = minimize_scalar(negative_power, bounds=(low, high), method="bounded",
                              options={"xatol": 1e-10 * seed})
    kappa = float(refined.x)
    if min(kappa - low, high - kappa) <= 1e-6 * seed:
        raise NoFringeError(f"fringe peak not bracketed around the seed wavenumber {seed:.6g}")

    u = x - center
    start = _moment_seed(u, intensity, grid.dx, kappa)
    inside = intensity >= FIT_FLOOR * float(np.max(intensity))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            params, _ = curve_fit(_two_packet_intensity, u[inside], intensity[inside], p0=start,
                                  maxfev=FIT_MAX_EVALUATIONS)
    except (RuntimeError, ValueError) as e:
        raise NoFringeError(f"fringe fit did not converge: {e}") from e
    amplitude, alpha, _, log_ratio, coherence, kappa, delta = (float(p) for p in params)
    if not (np.all(np.isfinite(params)) and alpha > 0.0 and amplitude > 0.0 and low < kappa < high):
        raise NoFringeError(f"fringe fit left the admissible region (kappa={kappa:.6g}, alpha={alpha:.3g})")
    if coherence < 0.0:
        coherence, delta = -coherence, delta + math.pi

    shift = math.remainder(delta, 2.0 * math.pi)
    if shift <= -math.pi:
        shift += 2.0 * math.pi
    logger.debug(json.dumps({
        "event": "fringe.fit",
        "seed_kappa": seed,
        "kappa": kappa,
        "shift": shift,
        "coherence": coherence,
        "log_ratio": log_ratio,
    }))
    return FringeAnalysis(
        fringe_spacing=2.0 * math.pi / kappa,
        phase_shift=shift,
        visibility=min(coherence / math.cosh(log_ratio), 1.0),
        center_intensity=float(spectral_interpolate(intensity, grid, center)),
        center=center,
        seed_spacing=2.0 * math.pi / seed,
    )



def _unwrap_against(extracted: float, applied: float) -> float:
    return extracted + 2.0 * math.pi * round((applied - extracted) / (2.0 * math.pi))


def phase_to_fringe_scan(grid: Grid1D, separation: float, sigma0: float, t_free: float,
                         phis: Sequence[float], dt: float = 1e-2,
                         mode: Literal["preparation", "mid_flight"] = "preparation",
                         kick_time: float = 0.5, amplitude_ratio: float = 1.0,
                         constants: PhysicalConstants = NATURAL_UNITS) -> List[Tuple[float, float]]:
    """
    Apply each phase to the right-hand packet, fly freely for t_free and
    read the fringe shift back. In "mid_flight" mode the phase is a kick
    on the right half of the grid at kick_time.
    """
    if not len(phis):
        raise ParameterError("phase scan needs at least one phase")
    hint = predicted_fringe_spacing(separation, sigma0, t_free, constants)
    results = []
    for phi in phis:
        if mode == "preparation":
            psi0 = two_packet_state(grid, separation, sigma0, phi, amplitude_ratio)
            potential = FreePotential()
        elif mode == "mid_flight":
            psi0 = two_packet_state(grid, separation, sigma0, 0.0, amplitude_ratio)
            potential = PhaseKick(delta_phi=phi, region=(grid.center, grid.x_max), at_time=kick_time)
        else:
            raise ParameterError(f"unknown phase application mode {mode!r}")
        final = evolve(psi0, potential, t_free, dt, snapshot_every=max(1, int(round(t_free / dt))),
                       constants=constants).psi_final
        analysis = fringe_analysis(final, hint)
        extracted = _unwrap_against(analysis.phase_shift, phi)
        logger.debug(json.dumps({
            "event": "fringe_scan.point",
            "mode": mode,
            "applied": phi,
            "extracted": extracted,
            "visibility": analysis.visibility,
        }))
        results.append((float(phi), float(extracted)))
    return results


def fringe_fit_line(pairs: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares slope and offset of extracted against applied phase."""
    if len(pairs) < 2:
        raise ParameterError("a line fit needs at least two scan points")
    applied, extracted = np.array(pairs, dtype=float).T
    slope, offset = np.polyfit(applied, extracted, 1)
    return float(slope), float(offset)
