"""Wave blocking of the buoy-to-tower line of sight.

For every time step the transect x = dx, 2 dx, ... < d is searched for a
surface point above the straight line joining the buoy antenna and the
tower antenna. The resulting LoS/blocked timeline is run-length encoded into
continuous-LoS (CLoS) and blocked (BLoS) segments, which are pooled over
Monte Carlo realizations into P_LoS, a CLoS duration histogram, the time
share per duration bin, the conditional CCDF and the outage probability.
"""
from __future__ import annotations

import enum
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import ConfigError, DomainError
from .sea_state import (
    AmplitudeConvention,
    SeaStateParams,
    SpectrumGrid,
    WaveRealization,
    build_spectrum_grid,
    make_space_factors,
    realization_seed,
    sample_realization,
    surface_elevation,
)


@dataclass(frozen=True)
class LinkGeometry:
    distance_m: float
    tower_height_m: float
    antenna_height_m: float = 0.0
    search_step_m: float = 1.0

    def __post_init__(self):
        if not self.distance_m > 0:
            raise ConfigError(f"distance must be positive, got {self.distance_m}")
        if not self.tower_height_m > 0:
            raise ConfigError(f"tower height must be positive, got {self.tower_height_m}")
        if self.antenna_height_m < 0:
            raise ConfigError(f"antenna height must be >= 0, got {self.antenna_height_m}")
        if not self.antenna_height_m < self.tower_height_m:
            raise ConfigError(
                f"antenna height {self.antenna_height_m} m must be below the tower height "
                f"{self.tower_height_m} m"
            )
        if not 0 < self.search_step_m <= self.distance_m / 10:
            raise ConfigError(
                f"search step {self.search_step_m} m must lie in (0, d/10 = {self.distance_m / 10:g}] m"
            )

    def search_positions(self) -> np.ndarray:
        """Blocker candidates dx, 2 dx, ... strictly short of the tower."""
        n = int(math.ceil(self.distance_m / self.search_step_m)) + 1
        xs = np.arange(1, n + 1) * self.search_step_m
        return xs[xs < self.distance_m]


@dataclass(frozen=True, eq=False)
class LosTimeline:
    dt_s: float
    flags: np.ndarray
    # rows of (t_index, x_blk_m, eta_blk_m), only for blocked steps
    blocker_log: Optional[np.ndarray] = None

    @property
    def window_s(self) -> float:
        return len(self.flags) * self.dt_s

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.flags)) * self.dt_s


@dataclass(frozen=True, eq=False)
class SegmentSet:
    """Run lengths (in time steps) of the LoS and blocked stretches of one window."""

    clos_runs: np.ndarray
    blos_runs: np.ndarray
    dt_s: float

    @property
    def clos_durations_s(self) -> np.ndarray:
        return self.clos_runs * self.dt_s

    @property
    def blos_durations_s(self) -> np.ndarray:
        return self.blos_runs * self.dt_s

    @property
    def n_samples(self) -> int:
        return int(self.clos_runs.sum() + self.blos_runs.sum())


@dataclass(eq=False)
class LosStatistics:
    p_los: float
    histogram: np.ndarray
    blos_histogram: np.ndarray
    mu_clos_s: float
    sigma_clos_s: float
    gamma_clos_s: float
    n_realizations: int
    dt_s: float
    window_s: float
    time_share: Optional[np.ndarray] = None
    ccdf: Optional[np.ndarray] = None

    @property
    def p_blos(self) -> float:
        return 1.0 - self.p_los

    @property
    def bin_times(self) -> np.ndarray:
        """Right bin edges t^k = k dt, k = 1..N."""
        return np.arange(1, len(self.histogram) + 1) * self.dt_s

    @property
    def n_clos(self) -> int:
        return int(self.histogram.sum())

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [float(v) for v in a]

        def num(v):
            return None if math.isnan(v) else float(v)

        return {
            "p_los": float(self.p_los),
            "p_blos": float(self.p_blos),
            "mu_clos_s": num(self.mu_clos_s),
            "sigma_clos_s": num(self.sigma_clos_s),
            "gamma_clos_s": num(self.gamma_clos_s),
            "n_realizations": int(self.n_realizations),
            "n_clos_segments": self.n_clos,
            "dt_s": float(self.dt_s),
            "window_s": float(self.window_s),
            "histogram": [int(v) for v in self.histogram],
            "blos_histogram": [int(v) for v in self.blos_histogram],
            "time_share": arr(self.time_share),
            "ccdf": arr(self.ccdf),
        }


def _slopes(geom, eta0, eta_x, x):
    lhs = (geom.tower_height_m - (eta0 + geom.antenna_height_m)) / geom.distance_m
    rhs = (geom.tower_height_m - eta_x) / (geom.distance_m - x)
    return lhs, rhs


def is_blocked(real: WaveRealization, geom: LinkGeometry, t: float, x: float) -> bool:
    """True if the surface at ``x`` rises above the antenna-tower line at time ``t``."""
    if not 0 < x < geom.distance_m:
        raise DomainError(f"x={x} must lie strictly between buoy and tower (0, {geom.distance_m})")
    lhs, rhs = _slopes(geom, surface_elevation(real, 0.0, t), surface_elevation(real, x, t), x)
    return bool(lhs > rhs)


def find_first_blocker(real: WaveRealization, geom: LinkGeometry, t: float):
    """Nearest blocking point to the buoy at time ``t``.

    Returns ``None`` when the line of sight is clear, else ``(x_blk, eta_blk)``.
    """
    xs = geom.search_positions()
    eta0 = surface_elevation(real, 0.0, t)
    eta = real.elevation(xs, t)
    lhs, rhs = _slopes(geom, eta0, eta, xs)
    hit = np.flatnonzero(lhs > rhs)
    if hit.size == 0:
        return None
    j = hit[0]
    return float(xs[j]), float(eta[j])


def _n_steps(window_s, dt_s):
    if not dt_s > 0 or not window_s > 0:
        raise ConfigError("window and dt must be positive")
    n = int(round(window_s / dt_s))
    if n < 1 or abs(n * dt_s - window_s) > 1e-9:
        raise ConfigError(f"window {window_s} s is not a whole number of {dt_s} s steps")
    return n


def check_time_step(grid: SpectrumGrid, dt_s: float) -> None:
    f_n = grid.max_frequency_hz
    if dt_s >= 1.0 / f_n:
        raise ConfigError(
            f"dt={dt_s} s must be below 1/f_N = {1.0 / f_n:.3g} s "
            f"(highest wave component {f_n:.3g} Hz)"
        )


class TransectKernel:
    """Cached spatial trig factors for one (grid, geometry) pair."""

    def __init__(self, grid: SpectrumGrid, geom: LinkGeometry):
        self.grid = grid
        self.geom = geom
        self.xs = geom.search_positions()
        # Fortran order keeps leading-column slices contiguous
        self.space = np.asfortranarray(make_space_factors(grid, self.xs))

    def timeline(self, real: WaveRealization, n_steps: int, dt_s: float, log_blockers=False):
        geom = self.geom
        ts = np.arange(n_steps) * dt_s
        tf = real.time_factors(ts)
        nf = self.grid.n_components
        eta0 = tf[:, :nf].sum(axis=1)
        y0 = eta0 + geom.antenna_height_m
        slope = (geom.tower_height_m - y0) / geom.distance_m

        # the surface never exceeds the amplitude sum, so only x where the
        # sight line is still below that bound can block
        n_x = len(self.xs)
        if np.all(slope > 0):
            bound = real.crest_bound * (1 + 1e-9) + 1e-12
            reach = float(np.max((bound - y0) / slope)) + geom.search_step_m
            n_x = int(np.searchsorted(self.xs, reach, side="right"))
        flags = np.ones(n_steps, dtype=bool)
        log = np.empty((0, 3)) if log_blockers else None
        if n_x == 0:
            return LosTimeline(dt_s, flags, log)

        xs = self.xs[:n_x]
        eta = tf @ self.space[:, :n_x]
        lhs, rhs = _slopes(geom, eta0[:, None], eta, xs[None, :])
        blocked = lhs > rhs
        flags = ~blocked.any(axis=1)
        if log_blockers:
            rows = np.flatnonzero(~flags)
            first = blocked[rows].argmax(axis=1)
            log = np.column_stack([rows.astype(float), xs[first], eta[rows, first]])
        return LosTimeline(dt_s, flags, log)


def los_timeline(
    real: WaveRealization,
    geom: LinkGeometry,
    window_s: float = 60.0,
    dt_s: float = 0.1,
    log_blockers: bool = False,
    kernel: Optional[TransectKernel] = None,
) -> LosTimeline:
    """LoS flag (True = clear) at t = 0, dt, ..., window - dt."""
    n = _n_steps(window_s, dt_s)
    check_time_step(real.grid, dt_s)
    if kernel is None:
        kernel = TransectKernel(real.grid, geom)
    return kernel.timeline(real, n, dt_s, log_blockers)


def _run_lengths(flags):
    flags = np.asarray(flags, dtype=bool)
    if flags.size == 0:
        raise DomainError("cannot segment an empty timeline")
    change = np.flatnonzero(flags[1:] != flags[:-1]) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [flags.size]]))
    return lengths, flags[starts]


def segment_timeline(tl: LosTimeline) -> SegmentSet:
    """Split a timeline into maximal LoS and blocked runs."""
    lengths, values = _run_lengths(tl.flags)
    return SegmentSet(
        clos_runs=lengths[values].astype(np.int64),
        blos_runs=lengths[~values].astype(np.int64),
        dt_s=tl.dt_s,
    )


def clos_time_share(stats: LosStatistics) -> np.ndarray:
    """Fraction of total LoS time spent in CLoS segments of each duration bin."""
    weighted = stats.histogram * stats.bin_times
    total = weighted.sum()
    if total <= 0:
        raise DomainError("no LoS segments: time share undefined")
    return weighted / total


def clos_ccdf(stats: LosStatistics) -> np.ndarray:
    """F(t^k | LoS): share of CLoS segments lasting at least t^k."""
    total = stats.histogram.sum()
    if total <= 0:
        raise DomainError("no LoS segments: CCDF undefined")
    tail = np.cumsum(stats.histogram[::-1])[::-1]
    return tail / total


def aggregate(segment_sets: Sequence[SegmentSet], dt_s: float, window_s: float) -> LosStatistics:
    """Pool segment sets from many realizations into :class:`LosStatistics`."""
    if len(segment_sets) == 0:
        raise DomainError("aggregate needs at least one realization")
    n = _n_steps(window_s, dt_s)
    hist = np.zeros(n, dtype=np.int64)
    blos_hist = np.zeros(n, dtype=np.int64)
    los_steps = 0
    for seg in segment_sets:
        if seg.n_samples != n:
            raise DomainError(f"segment set covers {seg.n_samples} steps, expected {n}")
        hist += np.bincount(seg.clos_runs, minlength=n + 1)[1:]
        blos_hist += np.bincount(seg.blos_runs, minlength=n + 1)[1:]
        los_steps += int(seg.clos_runs.sum())

    p_los = los_steps / (n * len(segment_sets))
    stats = LosStatistics(
        p_los=p_los,
        histogram=hist,
        blos_histogram=blos_hist,
        mu_clos_s=math.nan,
        sigma_clos_s=math.nan,
        gamma_clos_s=math.nan,
        n_realizations=len(segment_sets),
        dt_s=dt_s,
        window_s=window_s,
    )
    count = hist.sum()
    if count > 0:
        t = stats.bin_times
        mu = float((hist * t).sum() / count)
        stats.mu_clos_s = mu
        stats.sigma_clos_s = math.sqrt(float((hist * (t - mu) ** 2).sum() / count))
        stats.gamma_clos_s = float(t[int(np.argmax(hist))])
        stats.time_share = clos_time_share(stats)
        stats.ccdf = clos_ccdf(stats)
    return stats


def outage_probability(stats: LosStatistics, t_h_s: float) -> float:
    """Probability that a transfer needing ``t_h_s`` of unbroken LoS fails.

    ``t_h_s`` is rounded up to the next bin edge.
    """
    n = len(stats.histogram)
    if not 0 < t_h_s <= stats.window_s + 1e-9:
        raise DomainError(f"t_h={t_h_s} s outside (0, {stats.window_s}] s")
    k = min(max(int(math.ceil(t_h_s / stats.dt_s - 1e-9)), 1), n)
    if stats.histogram.sum() == 0:
        return 1.0
    ccdf = stats.ccdf if stats.ccdf is not None else clos_ccdf(stats)
    return float(stats.p_blos + stats.p_los * (1.0 - ccdf[k - 1]))


def _simulate_chunk(job):
    sea, geom, window_s, dt_s, indices, master_seed, convention, grid_kw, keep = job
    with threadpool_limits(limits=1):
        grid = build_spectrum_grid(sea, **grid_kw)
        kernel = TransectKernel(grid, geom)
        n = _n_steps(window_s, dt_s)
        out = []
        for i in indices:
            real = sample_realization(grid, realization_seed(master_seed, i), convention)
            tl = kernel.timeline(real, n, dt_s, log_blockers=keep)
            out.append(tl if keep else segment_timeline(tl))
        return out


def simulate(
    sea: SeaStateParams,
    geom: LinkGeometry,
    window_s: float = 60.0,
    dt_s: float = 0.1,
    n_realizations: int = 1000,
    master_seed: int = 0,
    convention: AmplitudeConvention = AmplitudeConvention.ENERGY_CONSERVING,
    workers: int = 1,
    keep_timelines: bool = False,
    **grid_kw,
):
    """Per-realization segment sets (or full timelines) in realization order.

    Realization ``i`` always uses :func:`realization_seed` ``(master_seed, i)``
    and single-threaded linear algebra, so ``workers`` never changes results.
    """
    if n_realizations < 1:
        raise DomainError("need at least one realization")
    grid = build_spectrum_grid(sea, **grid_kw)
    check_time_step(grid, dt_s)
    _n_steps(window_s, dt_s)
    convention = AmplitudeConvention(convention)

    workers = max(1, int(workers))
    n_chunks = 1 if workers == 1 else min(n_realizations, workers * 4)
    bounds = np.linspace(0, n_realizations, n_chunks + 1).astype(int)
    jobs = [
        (sea, geom, window_s, dt_s, range(lo, hi), master_seed, convention, grid_kw, keep_timelines)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    if workers == 1:
        parts = [_simulate_chunk(j) for j in jobs]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            parts = list(pool.map(_simulate_chunk, jobs))
    return [item for part in parts for item in part]


def run_monte_carlo(
    sea: SeaStateParams,
    geom: LinkGeometry,
    window_s: float = 60.0,
    dt_s: float = 0.1,
    n_realizations: int = 1000,
    master_seed: int = 0,
    convention: AmplitudeConvention = AmplitudeConvention.ENERGY_CONSERVING,
    workers: int = 1,
    **grid_kw,
) -> LosStatistics:
    """LoS statistics of ``n_realizations`` independent windows."""
    sets = simulate(
        sea, geom, window_s, dt_s, n_realizations, master_seed, convention, workers, **grid_kw
    )
    return aggregate(sets, dt_s, window_s)


class SweepAxis(str, enum.Enum):
    PEAK_PERIOD = "tp"
    DISTANCE = "d"
    ANTENNA_HEIGHT = "ha"
    TOWER_HEIGHT = "htwr"


def sweep(
    axis: SweepAxis,
    values: Sequence[float],
    sea: SeaStateParams,
    geom: LinkGeometry,
    **mc_kw,
):
    """Run :func:`run_monte_carlo` once per value of ``axis`` with a shared master seed.

    Returns a list of ``(value, LosStatistics)``.
    """
    axis = SweepAxis(axis)
    if len(values) == 0:
        raise DomainError("sweep needs at least one value")
    out = []
    for v in values:
        s, g = sea, geom
        if axis is SweepAxis.PEAK_PERIOD:
            s = replace(sea, t_p=float(v))
        elif axis is SweepAxis.DISTANCE:
            g = replace(geom, distance_m=float(v))
        elif axis is SweepAxis.ANTENNA_HEIGHT:
            g = replace(geom, antenna_height_m=float(v))
        else:
            g = replace(geom, tower_height_m=float(v))
        out.append((float(v), run_monte_carlo(s, g, **mc_kw)))
    return out
