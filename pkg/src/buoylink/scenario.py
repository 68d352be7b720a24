"""Scenario configuration, result files and the Table-I regression harness."""
from __future__ import annotations

import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, DomainError, RefinementError
from .los_engine import (
    LinkGeometry,
    LosStatistics,
    SweepAxis,
    aggregate,
    check_time_step,
    outage_probability,
    run_monte_carlo,
    segment_timeline,
    simulate,
    sweep,
)
from .sea_state import (
    AmplitudeConvention,
    SeaStateParams,
    build_spectrum_grid,
    validate_sea_state,
)

REQUIRED_KEYS = ("hs_m", "tp_s", "ha_m", "htwr_m", "d_m")
DEFAULTS = {
    "dx_m": 1.0,
    "window_s": 60.0,
    "dt_s": 0.1,
    "n_realizations": 1000,
    "seed": 0,
    "convention": AmplitudeConvention.ENERGY_CONSERVING.value,
    "water_depth_m": None,
    "n_components": 256,
    "omega_min_rad_s": 2 * math.pi * 0.01,
    "omega_max_rad_s": None,
}
KNOWN_KEYS = REQUIRED_KEYS + tuple(DEFAULTS)

NOMINAL_DISTANCE_M = 1000.0
NOMINAL_TOWER_M = 30.0
CALIBRATION_TOWER_HEIGHTS = (10.0, 20.0, 30.0, 50.0)


@dataclass(frozen=True)
class Scenario:
    sea: SeaStateParams
    geom: LinkGeometry
    window_s: float = 60.0
    dt_s: float = 0.1
    n_realizations: int = 1000
    master_seed: int = 0
    convention: AmplitudeConvention = AmplitudeConvention.ENERGY_CONSERVING
    n_components: int = 256
    omega_min_rad_s: float = 2 * math.pi * 0.01
    omega_max_rad_s: Optional[float] = None

    @property
    def grid_kw(self) -> dict:
        return {
            "n_components": self.n_components,
            "omega_min": self.omega_min_rad_s,
            "omega_max": self.omega_max_rad_s,
        }

    def mc_kw(self) -> dict:
        return dict(
            window_s=self.window_s,
            dt_s=self.dt_s,
            n_realizations=self.n_realizations,
            master_seed=self.master_seed,
            convention=self.convention,
            **self.grid_kw,
        )

    def to_dict(self) -> dict:
        return {
            "hs_m": self.sea.h_s,
            "tp_s": self.sea.t_p,
            "ha_m": self.geom.antenna_height_m,
            "htwr_m": self.geom.tower_height_m,
            "d_m": self.geom.distance_m,
            "dx_m": self.geom.search_step_m,
            "window_s": self.window_s,
            "dt_s": self.dt_s,
            "n_realizations": self.n_realizations,
            "seed": self.master_seed,
            "convention": self.convention.value,
            "water_depth_m": self.sea.water_depth_m,
            "n_components": self.n_components,
            "omega_min_rad_s": self.omega_min_rad_s,
            "omega_max_rad_s": self.omega_max_rad_s,
        }


def _as_float(key, v):
    if isinstance(v, bool):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {v!r}") from None


def _as_int(key, v):
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    f = _as_float(key, v)
    if f != int(f):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return int(f)


def scenario_from_mapping(cfg: dict) -> Scenario:
    """Build and fully validate a :class:`Scenario` from flat config keys."""
    if not isinstance(cfg, dict):
        raise ConfigError("scenario config must be a key-value mapping")
    unknown = sorted(set(cfg) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    c = {**DEFAULTS, **{k: v for k, v in cfg.items() if v is not None}}

    try:
        depth = None if c["water_depth_m"] is None else _as_float("water_depth_m", c["water_depth_m"])
        sea = SeaStateParams(_as_float("hs_m", c["hs_m"]), _as_float("tp_s", c["tp_s"]), depth)
    except DomainError as e:
        raise ConfigError(str(e)) from None
    verdict = validate_sea_state(sea)
    if not verdict:
        raise ConfigError(f"sea state rejected, {verdict.reason}")
    geom = LinkGeometry(
        distance_m=_as_float("d_m", c["d_m"]),
        tower_height_m=_as_float("htwr_m", c["htwr_m"]),
        antenna_height_m=_as_float("ha_m", c["ha_m"]),
        search_step_m=_as_float("dx_m", c["dx_m"]),
    )
    try:
        convention = AmplitudeConvention(c["convention"])
    except ValueError:
        choices = ", ".join(m.value for m in AmplitudeConvention)
        raise ConfigError(f"convention must be one of {choices}, got {c['convention']!r}") from None
    sc = Scenario(
        sea=sea,
        geom=geom,
        window_s=_as_float("window_s", c["window_s"]),
        dt_s=_as_float("dt_s", c["dt_s"]),
        n_realizations=_as_int("n_realizations", c["n_realizations"]),
        master_seed=_as_int("seed", c["seed"]),
        convention=convention,
        n_components=_as_int("n_components", c["n_components"]),
        omega_min_rad_s=_as_float("omega_min_rad_s", c["omega_min_rad_s"]),
        omega_max_rad_s=None
        if c["omega_max_rad_s"] is None
        else _as_float("omega_max_rad_s", c["omega_max_rad_s"]),
    )
    if sc.n_realizations < 1:
        raise ConfigError("n_realizations must be >= 1")
    if not 0 <= sc.master_seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if not (sc.dt_s > 0 and sc.window_s > 0):
        raise ConfigError("window_s and dt_s must be positive")
    if abs(sc.dt_s * round(sc.window_s / sc.dt_s) - sc.window_s) > 1e-9:
        raise ConfigError(f"window_s={sc.window_s} is not a whole number of dt_s={sc.dt_s} steps")
    try:
        grid = build_spectrum_grid(sea, **sc.grid_kw)
    except (DomainError, RefinementError) as e:
        raise ConfigError(str(e)) from None
    check_time_step(grid, sc.dt_s)
    return sc


def parse_scenario(source) -> Scenario:
    """Parse a scenario from a path or from config text.

    The document is flat ``key: value`` lines; JSON with the same keys is
    also accepted.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and os.path.isfile(source)):
        text = Path(source).read_text()
    else:
        text = str(source)
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed scenario document: {e}") from None
    return scenario_from_mapping(cfg or {})


def serialize_scenario(sc: Scenario) -> str:
    """Flat ``key: value`` text that :func:`parse_scenario` reads back to ``sc``."""
    lines = []
    for k, v in sc.to_dict().items():
        lines.append(f"{k}: {'null' if v is None else json.dumps(v)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- output files


def fmt(v) -> str:
    """Shortest round-trip text for a CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def csv_text(header: Sequence[str], rows) -> str:
    out = [",".join(header)]
    out.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def prepare_output_dir(path) -> Path:
    """Create ``path`` and prove it is writable before any computation starts."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe."):
            pass
    except OSError as e:
        raise OSError(f"output directory {out} is not writable: {e}") from e
    return out


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_manifest(out: Path, subcommand: str, config: dict, seed, files, wall_time_s: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "code_version": f"buoylink {__version__}",
        "numpy_version": np.__version__,
        "wall_time_s": wall_time_s,
        "files": sorted(files),
    }
    atomic_write(out / "manifest.json", json_text(manifest))


def histogram_rows(stats: LosStatistics):
    share = stats.time_share if stats.time_share is not None else np.zeros(len(stats.histogram))
    ccdf = stats.ccdf if stats.ccdf is not None else np.zeros(len(stats.histogram))
    return zip(stats.bin_times, stats.histogram, share, ccdf)


def outage_rows(stats: LosStatistics):
    for t in stats.bin_times:
        yield t, outage_probability(stats, t)


def write_los_outputs(out: Path, sc: Scenario, stats: LosStatistics, timelines=None):
    files = {
        "stats.json": json_text({"scenario": sc.to_dict(), "statistics": stats.to_dict()}),
        "histogram.csv": csv_text(["t_k_s", "h_k", "p_t_k", "ccdf"], histogram_rows(stats)),
        "outage.csv": csv_text(["t_h_s", "p_out"], outage_rows(stats)),
    }
    if timelines:
        rows = []
        for r, tl in enumerate(timelines):
            blk = {int(row[0]): (row[1], row[2]) for row in tl.blocker_log}
            for j, (t, flag) in enumerate(zip(tl.times, tl.flags)):
                x, eta = blk.get(j, (math.nan, math.nan))
                rows.append((r, t, bool(flag), x, eta))
        files["timeline.csv"] = csv_text(["realization", "t_s", "los", "x_blk_m", "eta_blk_m"], rows)
    for name, text in files.items():
        atomic_write(out / name, text)
    return list(files)


def run_los(sc: Scenario, out, workers: int = 1, n_timelines: int = 0):
    """Monte Carlo for one scenario; writes stats/histogram/outage (+timeline) and manifest."""
    out = prepare_output_dir(out)
    t0 = time.perf_counter()
    sets = simulate(sc.sea, sc.geom, workers=workers, **sc.mc_kw())
    stats = aggregate(sets, sc.dt_s, sc.window_s)
    timelines = None
    if n_timelines > 0:
        kw = sc.mc_kw()
        kw["n_realizations"] = min(n_timelines, sc.n_realizations)
        timelines = simulate(sc.sea, sc.geom, workers=1, keep_timelines=True, **kw)
        # the kept timelines must be the same windows that were aggregated
        assert all(
            np.array_equal(segment_timeline(tl).clos_runs, s.clos_runs)
            for tl, s in zip(timelines, sets)
        )
    files = write_los_outputs(out, sc, stats, timelines)
    write_manifest(out, "los", sc.to_dict(), sc.master_seed, files, time.perf_counter() - t0)
    return stats


def run_sweep(sc: Scenario, axis, values, out, workers: int = 1):
    out = prepare_output_dir(out)
    t0 = time.perf_counter()
    kw = sc.mc_kw()
    curve = sweep(axis, values, sc.sea, sc.geom, workers=workers, **kw)
    rows = [
        (v, s.p_los, s.mu_clos_s, s.sigma_clos_s, s.gamma_clos_s, s.n_clos) for v, s in curve
    ]
    name = "curve.csv"
    atomic_write(
        out / name,
        csv_text(["value", "p_los", "mu_clos_s", "sigma_clos_s", "gamma_clos_s", "n_clos"], rows),
    )
    config = {**sc.to_dict(), "axis": SweepAxis(axis).value, "values": [float(v) for v in values]}
    write_manifest(out, "sweep", config, sc.master_seed, [name], time.perf_counter() - t0)
    return curve


# ---------------------------------------------------------------- Table I harness


@dataclass(frozen=True)
class TableRow:
    h_s: float
    t_p: float
    h_a: float
    p_los: float
    mu_clos_s: float
    sigma_clos_s: float
    gamma_clos_s: float
    # acceptance bands under nominal geometry; None = report only
    p_los_band: Optional[tuple] = None
    mu_band: Optional[tuple] = None
    gamma_expected: Optional[float] = None

    @property
    def key(self):
        return (self.h_s, self.t_p, self.h_a)


TABLE_I = (
    TableRow(0.12, 2, 0, 0.98595, 12.98, 13.07, 1.1, p_los_band=(0.96, 1.0)),
    TableRow(0.12, 1, 0, 0.98591, 9.61, 10.78, 0.8),
    TableRow(0.12, 1, 0.1, 0.99999, 59.88, 2.25, 60.0, p_los_band=(0.999, 1.0), gamma_expected=60.0),
    TableRow(0.24, 2, 0, 0.8140, 1.742, 1.626, 0.9, p_los_band=(0.70, 0.92)),
    TableRow(0.67, 2.8, 0.4, 0.9548, 7.87, 9.16, 0.1),
    TableRow(0.67, 2.8, 0.8, 0.9992, 51.37, 17.09, 60.0, p_los_band=(0.99, 1.0), mu_band=(40.0, 58.0)),
    TableRow(2, 9, 1, 0.9924, 41.21, 21.07, 60.0),
    TableRow(4, 10, 1, 0.8422, 8.78, 7.88, 4.6, p_los_band=(0.74, 0.94)),
    TableRow(6, 14, 1, 0.8346, 10.55, 8.94, 6.1),
)
BANDED_ROWS = tuple(r for r in TABLE_I if r.p_los_band is not None)


def _within(v, band):
    return band[0] <= v <= band[1]


def check_row(row: TableRow, stats: LosStatistics) -> dict:
    """Band verdicts for one Table-I row; ``status`` is pass, fail or info."""
    checks = {}
    if row.p_los_band is not None:
        checks["p_los"] = _within(stats.p_los, row.p_los_band)
    if row.mu_band is not None:
        checks["mu_clos_s"] = _within(stats.mu_clos_s, row.mu_band)
    if row.gamma_expected is not None:
        checks["gamma_clos_s"] = abs(stats.gamma_clos_s - row.gamma_expected) < 1e-9
    status = "info" if not checks else ("pass" if all(checks.values()) else "fail")
    return {
        "h_s": row.h_s,
        "t_p": row.t_p,
        "h_a": row.h_a,
        "status": status,
        "checks": checks,
        "bands": {"p_los": row.p_los_band, "mu_clos_s": row.mu_band, "gamma_clos_s": row.gamma_expected},
        "reference": {
            "p_los": row.p_los,
            "mu_clos_s": row.mu_clos_s,
            "sigma_clos_s": row.sigma_clos_s,
            "gamma_clos_s": row.gamma_clos_s,
        },
        "simulated": {
            "p_los": stats.p_los,
            "mu_clos_s": stats.mu_clos_s,
            "sigma_clos_s": stats.sigma_clos_s,
            "gamma_clos_s": stats.gamma_clos_s,
        },
    }


def ha_flag_monotonicity(sea, geom, n_realizations, master_seed=0, ha_high=1.0, **kw):
    """Timeline steps that turn blocked when h_a is raised to ``ha_high``; 0 when monotone."""
    low = simulate(sea, geom, n_realizations=n_realizations, master_seed=master_seed, keep_timelines=True, **kw)
    high = simulate(sea, replace(geom, antenna_height_m=ha_high),
                    n_realizations=n_realizations, master_seed=master_seed, keep_timelines=True, **kw)
    return int(sum(np.count_nonzero(a.flags & ~b.flags) for a, b in zip(low, high)))


def _nondecreasing(vals):
    return all(b >= a for a, b in zip(vals, vals[1:]))


def monotonicity_suite(n_realizations=200, master_seed=0, workers=1) -> dict:
    """Direction checks: antenna height (exact per seed), peak period and distance."""
    geom0 = LinkGeometry(NOMINAL_DISTANCE_M, NOMINAL_TOWER_M, 0.0)
    flips = ha_flag_monotonicity(SeaStateParams(0.5, 2), geom0, min(n_realizations, 100), master_seed)

    tps = (10.0, 12.0, 14.0, 16.0)
    tp_curve = sweep(SweepAxis.PEAK_PERIOD, tps, SeaStateParams(4, 10),
                     replace(geom0, antenna_height_m=1.0),
                     n_realizations=n_realizations, master_seed=master_seed, workers=workers)
    ds = (250.0, 500.0, 1000.0, 2000.0)
    d_curve = sweep(SweepAxis.DISTANCE, ds, SeaStateParams(0.5, 2), geom0,
                    n_realizations=n_realizations, master_seed=master_seed, workers=workers)
    tp_p = [s.p_los for _, s in tp_curve]
    d_p = [s.p_los for _, s in d_curve]
    return {
        "ha_0_to_1_flips": flips,
        "ha_monotone": flips == 0,
        "tp_values": list(tps),
        "tp_p_los": tp_p,
        "tp_nondecreasing": _nondecreasing(tp_p),
        "d_values": list(ds),
        "d_p_los": d_p,
        "d_nonincreasing": _nondecreasing(d_p[::-1]),
    }


def regression_harness(
    n_realizations: int = 1000,
    rows: Optional[Sequence[TableRow]] = None,
    calibration_heights: Sequence[float] = CALIBRATION_TOWER_HEIGHTS,
    calibration_n: int = 200,
    master_seed: int = 0,
    workers: int = 1,
    include_monotonicity: bool = True,
    monotonicity_n: int = 200,
) -> dict:
    """Run Table-I rows under nominal geometry plus the tower-height sensitivity.

    Failures are recorded in the report, never raised.
    """
    rows = TABLE_I if rows is None else rows
    report = {
        "geometry": {"d_m": NOMINAL_DISTANCE_M, "htwr_m": NOMINAL_TOWER_M},
        "n_realizations": n_realizations,
        "master_seed": master_seed,
        "rows": [],
        "calibration": [],
    }
    geom = LinkGeometry(NOMINAL_DISTANCE_M, NOMINAL_TOWER_M)
    for row in rows:
        sea = SeaStateParams(row.h_s, row.t_p)
        stats = run_monte_carlo(sea, replace(geom, antenna_height_m=row.h_a),
                                n_realizations=n_realizations, master_seed=master_seed, workers=workers)
        report["rows"].append(check_row(row, stats))
        for h in calibration_heights:
            if calibration_n <= 0:
                break
            cs = run_monte_carlo(sea, LinkGeometry(NOMINAL_DISTANCE_M, h, row.h_a),
                                 n_realizations=calibration_n, master_seed=master_seed, workers=workers)
            report["calibration"].append({
                "h_s": row.h_s, "t_p": row.t_p, "h_a": row.h_a, "htwr_m": h,
                "n_realizations": calibration_n, "p_los": cs.p_los,
                "mu_clos_s": cs.mu_clos_s, "reference_p_los": row.p_los,
            })
    if include_monotonicity:
        report["monotonicity"] = monotonicity_suite(monotonicity_n, master_seed, workers)
    statuses = [r["status"] for r in report["rows"]]
    mono = report.get("monotonicity")
    mono_ok = mono is None or (mono["ha_monotone"] and mono["tp_nondecreasing"] and mono["d_nonincreasing"])
    report["overall"] = "pass" if "fail" not in statuses and mono_ok else "fail"
    return report


def format_report(report: dict) -> str:
    lines = [f"Table I under d={report['geometry']['d_m']:g} m, h_twr={report['geometry']['htwr_m']:g} m, "
             f"N_rp={report['n_realizations']}"]
    lines.append(f"{'Hs':>5} {'Tp':>4} {'ha':>4} {'P_LoS':>8} {'ref':>8} {'mu':>7} {'ref':>7} status")
    for r in report["rows"]:
        s, p = r["simulated"], r["reference"]
        lines.append(
            f"{r['h_s']:5g} {r['t_p']:4g} {r['h_a']:4g} {s['p_los']:8.4f} {p['p_los']:8.4f} "
            f"{s['mu_clos_s']:7.2f} {p['mu_clos_s']:7.2f} {r['status']}"
        )
    if report["calibration"]:
        lines.append("tower-height sensitivity (P_LoS):")
        for c in report["calibration"]:
            lines.append(f"  ({c['h_s']:g}, {c['t_p']:g}, {c['h_a']:g}) h_twr={c['htwr_m']:g} m -> {c['p_los']:.4f}")
    m = report.get("monotonicity")
    if m:
        lines.append(f"h_a 0->1 flips: {m['ha_0_to_1_flips']}; "
                     f"P_LoS vs T_p nondecreasing: {m['tp_nondecreasing']}; "
                     f"P_LoS vs d nonincreasing: {m['d_nonincreasing']}")
    lines.append(f"overall: {report['overall']}")
    return "\n".join(lines)
