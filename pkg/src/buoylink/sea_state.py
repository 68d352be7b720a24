"""Bretschneider sea states and random-phase/random-amplitude surface synthesis.

A sea state (significant height, peak period) is discretized on a uniform
angular-frequency grid. Each realization draws Rayleigh amplitudes and
uniform phases per component and the surface is the sum of deep-water
cosine waves travelling along +x (buoy towards shore).
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, RefinementError

log = logging.getLogger(__name__)

GRAVITY = 9.80665
BREAKING_RATIO = 0.8  # H_s [m] / T_p [s] above which the linear model is rejected
DEEP_WATER_RATIO = 0.3
DEFAULT_N_COMPONENTS = 256
DEFAULT_OMEGA_MIN = 2 * math.pi * 0.01
DEFAULT_OMEGA_MAX = 2 * math.pi * 1.5
ENERGY_TOLERANCE = 0.03
# upper-edge multiple of omega_p keeping >= 98 % of m0 below the grid top
_CAPTURE_MULTIPLE = (1.25 / -math.log(0.98)) ** 0.25


class AmplitudeConvention(str, enum.Enum):
    """How the Rayleigh amplitude of each component is scaled.

    ``ENERGY_CONSERVING`` gives E[a_i^2] = 2 S(w_i) dw so the realized
    variance equals m0. ``MEAN_MATCHED`` makes E[a_i] equal the expected
    amplitude sqrt(2 S(w_i) dw), which inflates the variance by 4/pi.
    """

    ENERGY_CONSERVING = "energy_conserving"
    MEAN_MATCHED = "mean_matched"


@dataclass(frozen=True)
class SeaStateParams:
    h_s: float
    t_p: float
    water_depth_m: Optional[float] = None

    def __post_init__(self):
        if not (self.h_s > 0 and self.t_p > 0):
            raise DomainError(
                f"h_s and t_p must be positive, got h_s={self.h_s}, t_p={self.t_p}"
            )
        if self.water_depth_m is not None and not self.water_depth_m > 0:
            raise DomainError(f"water depth must be positive, got {self.water_depth_m}")

    @property
    def omega_p(self) -> float:
        return 2 * math.pi / self.t_p

    @property
    def peak_wavelength_m(self) -> float:
        return GRAVITY * self.t_p**2 / (2 * math.pi)

    @property
    def m0(self) -> float:
        """Zeroth spectral moment, H_s^2 / 16."""
        return self.h_s**2 / 16.0


@dataclass(frozen=True)
class Validation:
    accepted: bool
    reason: Optional[str] = None
    shallow_water_warning: bool = False

    def __bool__(self):
        return self.accepted


def validate_sea_state(params: SeaStateParams) -> Validation:
    """Apply the wave-breaking rejection rule and the deep-water check."""
    shallow = False
    if params.water_depth_m is not None:
        limit = DEEP_WATER_RATIO * params.peak_wavelength_m
        if params.water_depth_m <= limit:
            shallow = True
            log.warning(
                "water depth %.3g m is not > %.3g m (0.3 peak wavelength); "
                "deep-water dispersion is questionable",
                params.water_depth_m,
                limit,
            )
    if params.h_s > BREAKING_RATIO * params.t_p:
        return Validation(
            False,
            f"breaking waves: h_s={params.h_s} m exceeds 0.8*t_p={BREAKING_RATIO * params.t_p:g}",
            shallow,
        )
    return Validation(True, None, shallow)


def spectrum_density(params: SeaStateParams, omega):
    """Bretschneider spectral density S(omega) in m^2/(rad/s).

    Accepts a scalar or an array of angular frequencies.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("spectrum_density requires omega > 0")
    wp = params.omega_p
    s = 5.0 / 16.0 * params.h_s**2 * wp**4 / w**5 * np.exp(-1.25 * (wp / w) ** 4)
    return float(s) if s.ndim == 0 else s


def default_omega_max(params: SeaStateParams) -> float:
    """1.5 Hz, raised for short peak periods so the grid top sits above the energy."""
    return max(DEFAULT_OMEGA_MAX, _CAPTURE_MULTIPLE * params.omega_p)


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    omegas: np.ndarray
    wavenumbers: np.ndarray
    expected_amplitudes: np.ndarray
    densities: np.ndarray
    delta_omega: float
    params: SeaStateParams

    @property
    def n_components(self) -> int:
        return len(self.omegas)

    @property
    def variance(self) -> float:
        """Riemann sum of S(w_i) dw, the grid's estimate of m0."""
        return float(np.sum(self.densities) * self.delta_omega)

    @property
    def max_frequency_hz(self) -> float:
        return float(self.omegas[-1] / (2 * math.pi))


def build_spectrum_grid(
    params: SeaStateParams,
    n_components: int = DEFAULT_N_COMPONENTS,
    omega_min: float = DEFAULT_OMEGA_MIN,
    omega_max: Optional[float] = None,
) -> SpectrumGrid:
    """Discretize the spectrum of an accepted sea state on a uniform grid.

    ``omega_max=None`` selects :func:`default_omega_max`.

    Raises
    ------
    DomainError
        For a rejected sea state or a malformed grid request.
    RefinementError
        If the discrete variance misses m0 by more than 3 %.
    """
    verdict = validate_sea_state(params)
    if not verdict:
        raise DomainError(verdict.reason)
    if omega_max is None:
        omega_max = default_omega_max(params)
    if n_components < 2:
        raise DomainError(f"need at least 2 components, got {n_components}")
    if not 0 < omega_min < omega_max:
        raise DomainError(f"need 0 < omega_min < omega_max, got {omega_min}, {omega_max}")

    omegas = np.linspace(omega_min, omega_max, n_components)
    dw = (omega_max - omega_min) / (n_components - 1)
    dens = spectrum_density(params, omegas)
    grid = SpectrumGrid(
        omegas=_readonly(omegas),
        wavenumbers=_readonly(omegas**2 / GRAVITY),
        expected_amplitudes=_readonly(np.sqrt(2.0 * dens * dw)),
        densities=_readonly(dens),
        delta_omega=dw,
        params=params,
    )
    ratio = grid.variance / params.m0
    if abs(ratio - 1) > ENERGY_TOLERANCE:
        raise RefinementError(
            f"grid holds {100 * ratio:.1f}% of h_s^2/16 for {params}; "
            f"widen [{omega_min:.3g}, {omega_max:.3g}] rad/s or raise n_components"
        )
    return grid


def rayleigh_scale(grid: SpectrumGrid, convention: AmplitudeConvention) -> np.ndarray:
    """Per-component Rayleigh scale parameter for ``convention``."""
    convention = AmplitudeConvention(convention)
    if convention is AmplitudeConvention.ENERGY_CONSERVING:
        return np.sqrt(grid.densities * grid.delta_omega)
    # mean of Rayleigh(sigma) is sigma*sqrt(pi/2)
    return grid.expected_amplitudes * math.sqrt(2.0 / math.pi)


@dataclass(frozen=True, eq=False)
class WaveRealization:
    """One random draw of amplitudes and phases on a spectrum grid."""

    grid: SpectrumGrid
    amplitudes: np.ndarray
    phases: np.ndarray
    seed: int
    convention: AmplitudeConvention = AmplitudeConvention.ENERGY_CONSERVING

    @property
    def crest_bound(self) -> float:
        """Upper bound on |eta| anywhere: the amplitude sum."""
        return float(np.sum(self.amplitudes))

    def elevation(self, x, t):
        """Elevation at broadcastable arrays of positions ``x`` and times ``t``."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        arg = (
            self.grid.omegas * t[..., None]
            + self.grid.wavenumbers * x[..., None]
            + self.phases
        )
        return np.sum(self.amplitudes * np.cos(arg), axis=-1)

    def time_factors(self, t):
        """Rows ``[a cos(w t + alpha), -a sin(w t + alpha)]`` for times ``t``."""
        arg = np.outer(np.asarray(t, dtype=float), self.grid.omegas) + self.phases
        return np.hstack([self.amplitudes * np.cos(arg), -self.amplitudes * np.sin(arg)])

    def elevation_lattice(self, xs, ts, space_factors=None):
        """Elevation on the (t, x) lattice, shape ``(len(ts), len(xs))``.

        ``space_factors`` may carry a precomputed :func:`space_factors` block
        for ``xs`` so repeated calls on one transect skip the trig.
        """
        if space_factors is None:
            space_factors = make_space_factors(self.grid, xs)
        return self.time_factors(ts) @ space_factors


def make_space_factors(grid: SpectrumGrid, xs) -> np.ndarray:
    """Stacked ``[cos(k x); sin(k x)]`` with shape ``(2 N_f, len(xs))``."""
    kx = np.outer(grid.wavenumbers, np.asarray(xs, dtype=float))
    return np.vstack([np.cos(kx), np.sin(kx)])


def flat_realization(grid: SpectrumGrid) -> WaveRealization:
    """A realization with every amplitude zero (calm sea)."""
    n = grid.n_components
    return WaveRealization(grid, np.zeros(n), np.zeros(n), seed=0)


def sample_realization(
    grid: SpectrumGrid,
    seed: int,
    amplitude_convention: AmplitudeConvention = AmplitudeConvention.ENERGY_CONSERVING,
) -> WaveRealization:
    """Draw Rayleigh amplitudes and uniform phases from a Philox stream keyed by ``seed``."""
    convention = AmplitudeConvention(amplitude_convention)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    n = grid.n_components
    amps = rng.rayleigh(1.0, n) * rayleigh_scale(grid, convention)
    phases = rng.random(n) * (2 * math.pi)
    return WaveRealization(grid, _readonly(amps), _readonly(phases), int(seed), convention)


def realization_seed(master_seed: int, index: int) -> int:
    """64-bit per-realization seed derived from ``(master_seed, index)``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def surface_elevation(real: WaveRealization, x: float, t: float) -> float:
    """Surface elevation eta(x, t) in metres."""
    return float(real.elevation(x, t))


def realized_significant_height(real: WaveRealization, duration_s: float, dt_s: float) -> float:
    """4*sqrt(var) of the elevation record at the buoy.

    This is the spectral proxy for significant wave height, not a
    zero-crossing H_1/3.
    """
    if not dt_s > 0:
        raise DomainError(f"dt must be positive, got {dt_s}")
    n = int(round(duration_s / dt_s))
    if n < 2:
        raise DomainError("record needs at least two samples")
    eta = real.elevation(0.0, np.arange(n) * dt_s)
    return 4.0 * math.sqrt(float(np.var(eta)))
