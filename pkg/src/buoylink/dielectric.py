"""Complex permittivity of water and ice, penetration depth and slab attenuation.

Single-Debye-pair model for pure and saline water with a conductivity loss
term, plus the empirical dry-ice model, following ITU-R P.527.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError

C_LIGHT_M_PER_NS = 0.299792458
FREQ_MIN_GHZ = 0.1
FREQ_MAX_GHZ = 100.0
NEPER_TO_DB = 20.0 * math.log10(math.e)


class Medium(str, enum.Enum):
    PURE_WATER = "pure_water"
    SEA_WATER = "sea_water"
    ICE = "ice"


@dataclass(frozen=True)
class MediumSpec:
    kind: Medium
    temperature_celsius: float
    salinity_ppt: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Medium(self.kind))
        if self.salinity_ppt < 0:
            raise DomainError(f"salinity must be >= 0 g/kg, got {self.salinity_ppt}")
        if self.kind is Medium.ICE and self.temperature_celsius > 0:
            raise DomainError(
                f"ice requires temperature <= 0 degC, got {self.temperature_celsius}"
            )
        if self.kind is Medium.PURE_WATER and self.salinity_ppt != 0:
            raise DomainError("pure water must have salinity 0")


@dataclass(frozen=True)
class MediumSample:
    """Relative permittivity eps_real - j*eps_imag at one frequency."""

    eps_real: float
    eps_imag: float
    frequency_ghz: float

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT_M_PER_NS / self.frequency_ghz


def _theta(temp_c):
    return 300.0 / (temp_c + 273.15) - 1.0


def _pure_water_terms(temp_c):
    """Static/intermediate/optical permittivities and Debye frequencies (GHz)."""
    th = _theta(temp_c)
    eps_s = 77.6 + 103.3 * th
    eps_1 = 0.0671 * eps_s
    eps_inf = 3.52 - 7.52 * th
    f1 = 20.20 - 146.4 * th + 316.0 * th * th
    f2 = 39.8 * f1
    return eps_s, eps_1, eps_inf, f1, f2


def _debye(f, eps_s, eps_1, eps_inf, f1, f2):
    r1 = f / f1
    r2 = f / f2
    re = (eps_s - eps_1) / (1 + r1 * r1) + (eps_1 - eps_inf) / (1 + r2 * r2) + eps_inf
    im = r1 * (eps_s - eps_1) / (1 + r1 * r1) + r2 * (eps_1 - eps_inf) / (1 + r2 * r2)
    return re, im


def sea_water_conductivity(temp_c: float, salinity: float) -> float:
    """Ionic conductivity of sea water in S/m."""
    t = temp_c
    s = salinity
    sigma_35 = (
        2.903602 + 8.607e-2 * t + 4.738817e-4 * t**2 - 2.991e-6 * t**3 + 4.3047e-9 * t**4
    )
    r_15 = s * (37.5109 + 5.45216 * s + 1.4409e-2 * s**2) / (1004.75 + 182.283 * s + s**2)
    alpha_0 = (6.9431 + 3.2841 * s - 9.9486e-2 * s**2) / (84.850 + 69.024 * s + s**2)
    alpha_1 = 49.843 - 0.2276 * s + 0.198e-2 * s**2
    r_t15 = 1 + alpha_0 * (t - 15) / (alpha_1 + t)
    return sigma_35 * r_15 * r_t15


def _water(f, temp_c, salinity):
    eps_s, eps_1, eps_inf, f1, f2 = _pure_water_terms(temp_c)
    t, s = temp_c, salinity
    eps_ss = eps_s * math.exp(-3.56417e-3 * s + 4.74868e-6 * s * s + 1.15574e-5 * t * s)
    f1s = f1 * (1 + s * (2.39357e-3 - 3.13530e-5 * t + 2.52477e-7 * t * t))
    eps_1s = eps_1 * math.exp(-6.28908e-3 * s + 1.76032e-4 * s * s - 9.22144e-5 * t * s)
    f2s = f2 * (1 + s * (-1.99723e-2 + 1.81176e-4 * t))
    eps_infs = eps_inf * (1 + s * (-2.04265e-3 + 1.57883e-4 * t))
    re, im = _debye(f, eps_ss, eps_1s, eps_infs, f1s, f2s)
    return re, im + 18.0 * sea_water_conductivity(t, s) / f


def _ice(f, temp_c):
    th = _theta(temp_c)
    tk = temp_c + 273.15
    eps_re = 3.1884 + 0.00091 * temp_c
    a = (0.00504 + 0.0062 * th) * math.exp(-22.1 * th)
    tau = 335.0 / tk
    e = math.exp(tau)
    b = (
        0.0207 / tk * e / (e - 1) ** 2
        + 1.16e-11 * f * f
        + math.exp(-9.963 + 0.0372 * temp_c)
    )
    return eps_re, a / f + b * f


def complex_permittivity(medium: MediumSpec, frequency_ghz: float) -> MediumSample:
    """Evaluate the relative permittivity of ``medium`` at ``frequency_ghz``.

    Raises
    ------
    DomainError
        If the frequency is outside 0.1-100 GHz.
    """
    f = float(frequency_ghz)
    if not FREQ_MIN_GHZ <= f <= FREQ_MAX_GHZ:
        raise DomainError(
            f"frequency {f} GHz outside supported range [{FREQ_MIN_GHZ}, {FREQ_MAX_GHZ}] GHz"
        )
    if medium.kind is Medium.ICE:
        re, im = _ice(f, medium.temperature_celsius)
    else:
        re, im = _water(f, medium.temperature_celsius, medium.salinity_ppt)
    return MediumSample(eps_real=re, eps_imag=im, frequency_ghz=f)


def penetration_depth(sample: MediumSample) -> float:
    """Depth (m) where the field amplitude has decayed to 1/e.

    Returns ``math.inf`` for a lossless sample.
    """
    er, ei = sample.eps_real, sample.eps_imag
    if ei == 0:
        return math.inf
    mag = math.hypot(er, ei)
    # |eps| - eps' written without cancellation for low-loss media
    gap = ei * ei / (mag + er) if er > 0 else mag - er
    return sample.wavelength_m / (2 * math.pi) * math.sqrt(2.0 / gap)


def slab_attenuation_db(delta_m: float, thickness_m: float) -> float:
    """Amplitude loss in dB over ``thickness_m`` for penetration depth ``delta_m``."""
    if thickness_m < 0:
        raise DomainError(f"thickness must be >= 0 m, got {thickness_m}")
    return NEPER_TO_DB * thickness_m / delta_m


def attenuation_db(medium: MediumSpec, frequency_ghz: float, thickness_m: float) -> float:
    """Field-amplitude attenuation in dB through ``thickness_m`` of ``medium``."""
    if thickness_m < 0:
        raise DomainError(f"thickness must be >= 0 m, got {thickness_m}")
    delta = penetration_depth(complex_permittivity(medium, frequency_ghz))
    return slab_attenuation_db(delta, thickness_m)
