"""
Field containers and elementary field algebra on a periodic 1-D grid.

Derivatives are spectral: multiply by (ik)^order in Fourier space. For odd
orders the Nyquist mode is dropped so real input stays real.
"""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from phaselab.errors import AliasingError, DegenerateStateError, DimensionError, ParameterError, ResolutionError
from phaselab.models.physics import NATURAL_UNITS, Grid1D, PhysicalConstants


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _check_length(values: np.ndarray, grid: Grid1D, label: str = "field") -> None:
    if np.ndim(values) != 1 or len(values) != grid.n_points:
        raise DimensionError(
            f"{label} has shape {np.shape(values)}, grid needs ({grid.n_points},)"
        )


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Wavefunction samples psi(x_i) on a grid."""
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        _check_length(np.asarray(self.values), self.grid)
        object.__setattr__(self, "values", _frozen_array(self.values, complex))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def with_values(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values)

    def scaled(self, factor: Union[complex, float]) -> "ComplexField":
        return ComplexField(self.grid, factor * self.values)


@dataclass(frozen=True, eq=False)
class HydroFields:
    """
    Amplitude R >= 0 and action S of psi = R * exp(i S / hbar).

    S carries units of action; the material phase is the read-out -S/hbar.
    """
    grid: Grid1D
    R: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        _check_length(np.asarray(self.R), self.grid, "R")
        _check_length(np.asarray(self.S), self.grid, "S")
        R = np.asarray(self.R, dtype=float)
        if np.any(R < 0.0):
            raise ParameterError("amplitude R must be non-negative")
        object.__setattr__(self, "R", _frozen_array(R, float))
        object.__setattr__(self, "S", _frozen_array(self.S, float))

    @property
    def density(self) -> np.ndarray:
        return self.R ** 2

    def material_phase(self, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
        return -self.S / constants.hbar


# --- construction -------------------------------------------------------------

def make_gaussian(grid: Grid1D, x0: float, sigma0: float, k0: float = 0.0) -> ComplexField:
    """
    Normalised packet psi ~ exp(-(x-x0)^2 / (4 sigma0^2)) * exp(i k0 x).

    sigma0 is the position spread of |psi|^2.
    """
    if sigma0 <= 0.0:
        raise ParameterError(f"sigma0 must be positive (got {sigma0})")
    if sigma0 < 2.0 * grid.dx:
        raise ResolutionError(f"sigma0={sigma0} is below 2*dx={2.0 * grid.dx:.6g}")
    if abs(k0) >= grid.k_nyquist:
        raise AliasingError(f"|k0|={abs(k0)} is at or beyond the Nyquist limit {grid.k_nyquist:.6g}")
    x = grid.x
    values = np.exp(-((x - x0) ** 2) / (4.0 * sigma0 ** 2) + 1j * k0 * x)
    return normalize(ComplexField(grid, values))


def harmonic_ground_state(
    grid: Grid1D,
    omega: float,
    constants: PhysicalConstants = NATURAL_UNITS,
    center: float = 0.0,
) -> ComplexField:
    """Ground state of V = m omega^2 (x - center)^2 / 2, real and positive."""
    if omega <= 0.0:
        raise ParameterError(f"omega must be positive (got {omega})")
    alpha = constants.mass * omega / constants.hbar
    values = np.exp(-0.5 * alpha * (grid.x - center) ** 2)
    return normalize(ComplexField(grid, values))


def coherent_state(
    grid: Grid1D,
    x0: float,
    omega: float,
    constants: PhysicalConstants = NATURAL_UNITS,
    p0: float = 0.0,
) -> ComplexField:
    """Ground state displaced to x0 with mean momentum p0."""
    ground = harmonic_ground_state(grid, omega, constants, center=x0)
    return normalize(ground.with_values(ground.values * np.exp(1j * p0 * grid.x / constants.hbar)))


def normalize(psi: ComplexField) -> ComplexField:
    norm = norm_squared(psi)
    if not norm > 0.0 or not math.isfinite(norm):
        raise DegenerateStateError("cannot normalise a field with zero or non-finite norm")
    return psi.scaled(1.0 / math.sqrt(norm))


# --- integrals ----------------------------------------------------------------

def norm_squared(psi: ComplexField) -> float:
    """Riemann sum of |psi|^2 dx (exact for band-limited periodic fields)."""
    return float(np.sum(np.abs(psi.values) ** 2) * psi.grid.dx)


def position_width(psi: ComplexField) -> float:
    """sigma = sqrt(<x^2> - <x>^2)."""
    density = psi.density
    total = np.sum(density)
    if total <= 0.0:
        raise DegenerateStateError("position width of a zero field is undefined")
    x = psi.grid.x
    mean = np.sum(x * density) / total
    return float(math.sqrt(max(np.sum((x - mean) ** 2 * density) / total, 0.0)))


# --- spectral calculus ----------------------------------------------------------

def spectral_derivative(values: np.ndarray, grid: Grid1D, order: int = 1) -> np.ndarray:
    """d^order/dx^order of a periodic sampled field."""
    values = np.asarray(values)
    _check_length(values, grid)
    if order < 0:
        raise ParameterError(f"derivative order must be non-negative (got {order})")
    if order == 0:
        return values.copy()
    multiplier = (1j * grid.k) ** order
    if order % 2:
        multiplier[grid.n_points // 2] = 0.0
    result = np.fft.ifft(multiplier * np.fft.fft(values))
    if np.isrealobj(values):
        return result.real
    return result


def gradient(field: np.ndarray, grid: Grid1D) -> np.ndarray:
    return spectral_derivative(field, grid, order=1)


def laplacian(field: np.ndarray, grid: Grid1D) -> np.ndarray:
    return spectral_derivative(field, grid, order=2)


def spectral_interpolate(values: np.ndarray, grid: Grid1D, x) -> np.ndarray:
    """
    Evaluate the trigonometric interpolant of `values` at arbitrary x.

    The Nyquist coefficient is split symmetrically so real data gives a
    real interpolant.
    """
    values = np.asarray(values)
    _check_length(values, grid)
    points = np.atleast_1d(np.asarray(x, dtype=float))
    coefficients = np.fft.fft(values) / grid.n_points
    k = grid.k
    offset = points[:, None] - grid.x_min
    basis = np.exp(1j * offset * k[None, :])
    nyquist = grid.n_points // 2
    basis[:, nyquist] = np.cos(offset[:, 0] * k[nyquist])
    result = basis @ coefficients
    if np.isrealobj(values):
        result = result.real
    return result if np.ndim(x) else result[0]
