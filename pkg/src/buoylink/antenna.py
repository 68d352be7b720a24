"""Buoy antenna tilt from the local wave slope, and what it costs.

The antenna is assumed to stay normal to the sea surface, so its tilt from
vertical equals the surface slope angle at the buoy. Tilt lengthens the
antenna needed to hold a given effective height and moves the link off the
peak of the elevation pattern.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterator, Optional

import numpy as np

from .errors import DomainError
from .sea_state import WaveRealization

HALF_WAVE_DIPOLE_DIRECTIVITY = 1.643


@dataclass(frozen=True)
class TiltSample:
    t_s: float
    theta_a_deg: float

    def __post_init__(self):
        if not abs(self.theta_a_deg) < 90:
            raise DomainError(f"tilt must be within (-90, 90) deg, got {self.theta_a_deg}")


@dataclass(frozen=True, eq=False)
class TiltSeries:
    t_s: np.ndarray
    theta_deg: np.ndarray

    def __len__(self):
        return len(self.t_s)

    def __iter__(self) -> Iterator[TiltSample]:
        for t, th in zip(self.t_s, self.theta_deg):
            yield TiltSample(float(t), float(th))

    @property
    def max_abs_deg(self) -> float:
        return float(np.max(np.abs(self.theta_deg)))


def tilt_series(
    real: WaveRealization,
    x: float = 0.0,
    window_s: float = 60.0,
    dt_s: float = 0.1,
    half_width_m: float = 1.0,
) -> TiltSeries:
    """Antenna tilt atan((eta(x+h) - eta(x-h)) / 2h) sampled every ``dt_s``.

    The default h = 1 m is the usual +-1 m central difference; it smooths
    slopes of waves shorter than about 4 m.
    """
    if not dt_s > 0 or not half_width_m > 0:
        raise DomainError("dt and stencil half-width must be positive")
    n = int(round(window_s / dt_s))
    t = np.arange(n) * dt_s
    rise = real.elevation(x + half_width_m, t) - real.elevation(x - half_width_m, t)
    return TiltSeries(t, np.degrees(np.arctan(rise / (2 * half_width_m))))


def required_length(h_a: float, theta_a_deg):
    """Antenna length keeping effective height ``h_a`` at tilt ``theta_a_deg``."""
    th = np.asarray(theta_a_deg, dtype=float)
    if np.any(np.abs(th) >= 90):
        raise DomainError("tilt must satisfy |theta| < 90 deg")
    out = h_a / np.cos(np.radians(th))
    return float(out) if out.ndim == 0 else out


def dipole_directivity(angle_from_broadside_deg):
    """Half-wave dipole directivity (dBi) at an elevation angle off broadside.

    Returns ``-inf`` at the axial nulls (|angle| >= 90).
    """
    psi = np.radians(np.asarray(angle_from_broadside_deg, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        field = np.cos(0.5 * math.pi * np.sin(psi)) / np.cos(psi)
        d = 10 * np.log10(HALF_WAVE_DIPOLE_DIRECTIVITY * field**2)
    d = np.where(np.abs(psi) >= 0.5 * math.pi, -np.inf, d)
    return float(d) if d.ndim == 0 else d


class PatternKind(str, enum.Enum):
    ANALYTIC_HALF_WAVE_DIPOLE = "dipole"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class ElevationPattern:
    kind: PatternKind = PatternKind.ANALYTIC_HALF_WAVE_DIPOLE
    angles_deg: Optional[np.ndarray] = None
    dbi: Optional[np.ndarray] = None
    symmetric: bool = True
    name: str = "dipole"

    def __post_init__(self):
        if self.kind is PatternKind.TABULATED:
            a = np.asarray(self.angles_deg, dtype=float)
            if a.ndim != 1 or len(a) < 2 or len(a) != len(self.dbi):
                raise DomainError("tabulated pattern needs matching angle/dBi columns of length >= 2")
            if np.any(np.diff(a) <= 0):
                raise DomainError("tabulated pattern angles must be strictly increasing")

    @classmethod
    def table(cls, angles_deg, dbi, symmetric=None, name="tabulated"):
        a = np.asarray(angles_deg, dtype=float)
        if symmetric is None:
            symmetric = bool(a[0] >= 0)
        return cls(PatternKind.TABULATED, a, np.asarray(dbi, dtype=float), symmetric, name)

    def coverage(self):
        if self.kind is PatternKind.ANALYTIC_HALF_WAVE_DIPOLE:
            return -90.0, 90.0
        lo, hi = float(self.angles_deg[0]), float(self.angles_deg[-1])
        if self.symmetric:
            return -hi, hi
        return lo, hi

    def __call__(self, angle_deg):
        """Directivity in dBi; tables are interpolated linearly."""
        if self.kind is PatternKind.ANALYTIC_HALF_WAVE_DIPOLE:
            return dipole_directivity(angle_deg)
        a = np.asarray(angle_deg, dtype=float)
        q = np.abs(a) if self.symmetric else a
        lo, hi = self.angles_deg[0], self.angles_deg[-1]
        if np.any(q < lo - 1e-12) or np.any(q > hi + 1e-12):
            raise DomainError(
                f"pattern '{self.name}' covers [{lo:g}, {hi:g}] deg"
                f"{' (symmetric)' if self.symmetric else ''}; "
                f"requested angles span [{float(np.min(a)):g}, {float(np.max(a)):g}]"
            )
        out = np.interp(q, self.angles_deg, self.dbi)
        return float(out) if out.ndim == 0 else out


def load_pattern_csv(path, symmetric: Optional[bool] = None, name: Optional[str] = None) -> ElevationPattern:
    """Read an ``angle_deg, dbi`` table; lines starting with '#' are comments."""
    angles, gains = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        header = next(rows)
        if [h.strip() for h in header] != ["angle_deg", "dbi"]:
            raise DomainError(f"{path}: expected header 'angle_deg,dbi', got {header}")
        for row in rows:
            if not row:
                continue
            angles.append(float(row[0]))
            gains.append(float(row[1]))
    return ElevationPattern.table(angles, gains, symmetric, name or str(path))


REFERENCE_PATTERNS = ("dipole", "monopole", "bowtie", "bicone")


def reference_pattern(name: str) -> ElevationPattern:
    """Two-point reference tables (0 deg and 17.66 deg) for the built-in antenna types.

    These hold only the directivity endpoints at zero tilt and at the largest
    tilt of a (10 m, 13 s) sea; they are not full patterns.
    """
    if name not in REFERENCE_PATTERNS:
        raise DomainError(f"unknown reference pattern {name!r}; choose from {REFERENCE_PATTERNS}")
    ref = resources.files("buoylink") / "data" / f"{name}_two_point.csv"
    with resources.as_file(ref) as p:
        return load_pattern_csv(p, symmetric=True, name=name)


def gain_excursion(pattern: ElevationPattern, tilts) -> tuple:
    """``(min_dbi, max_dbi)`` of the pattern over a tilt series."""
    if isinstance(tilts, TiltSeries):
        th = tilts.theta_deg
    else:
        th = np.array([s.theta_a_deg if isinstance(s, TiltSample) else s for s in tilts], dtype=float)
    if th.size == 0:
        raise DomainError("empty tilt series")
    g = np.asarray(pattern(th))
    return float(g.min()), float(g.max())
