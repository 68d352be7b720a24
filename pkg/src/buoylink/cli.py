"""Command line entry point: ``buoylink <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import dielectric as diel
from .antenna import (
    ElevationPattern,
    gain_excursion,
    load_pattern_csv,
    reference_pattern,
    REFERENCE_PATTERNS,
    required_length,
    tilt_series,
)
from .errors import ConfigError, DomainError, RefinementError
from .los_engine import SweepAxis
from .power_budget import PaAssumptions, eirp_dbm, pa_dc_power_mw
from .scenario import (
    atomic_write,
    csv_text,
    format_report,
    json_text,
    parse_scenario,
    prepare_output_dir,
    regression_harness,
    run_los,
    run_sweep,
    scenario_from_mapping,
    write_manifest,
)
from .sea_state import (
    AmplitudeConvention,
    SeaStateParams,
    build_spectrum_grid,
    realization_seed,
    realized_significant_height,
    sample_realization,
)

OUT_ENV = "BUOYLINK_OUT_DIR"
log = logging.getLogger("buoylink")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _scenario(args):
    """Scenario from --config, with --seed overriding the file."""
    sc = parse_scenario(Path(args.config))
    if args.seed is not None:
        cfg = sc.to_dict()
        cfg["seed"] = args.seed
        sc = scenario_from_mapping(cfg)
    return sc


def cmd_dielectric(args):
    out = prepare_output_dir(args.out)
    t0 = time.perf_counter()
    medium = diel.MediumSpec(args.medium, args.temperature, args.salinity)
    if args.freqs:
        freqs = _floats(args.freqs)
    else:
        lo, hi, n = args.sweep
        freqs = np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(n))
    rows = []
    for f in freqs:
        s = diel.complex_permittivity(medium, f)
        delta = diel.penetration_depth(s)
        rows.append((f, s.eps_real, s.eps_imag, delta, diel.NEPER_TO_DB / delta))
    atomic_write(out / "dielectric.csv",
                 csv_text(["f_ghz", "eps_real", "eps_imag", "delta_m", "att_db_per_m"], rows))
    config = {"medium": medium.kind.value, "temperature_c": args.temperature,
              "salinity_ppt": args.salinity, "frequencies_ghz": [float(f) for f in freqs]}
    write_manifest(out, "dielectric", config, None, ["dielectric.csv"], time.perf_counter() - t0)


def _sea_from_args(args):
    if getattr(args, "config", None):
        sc = _scenario(args)
        return sc.sea, sc.master_seed, sc.convention
    if args.hs is None or args.tp is None:
        raise ConfigError("give --config or both --hs and --tp")
    seed = 0 if args.seed is None else args.seed
    return SeaStateParams(args.hs, args.tp), seed, AmplitudeConvention(args.convention)


def cmd_wave(args):
    out = prepare_output_dir(args.out)
    t0 = time.perf_counter()
    sea, seed, conv = _sea_from_args(args)
    grid = build_spectrum_grid(sea)
    xs = _floats(args.x)
    n = int(round(args.window / args.dt))
    ts = np.arange(n) * args.dt
    rows, swh = [], []
    for r in range(args.realizations):
        real = sample_realization(grid, realization_seed(seed, r), conv)
        eta = real.elevation(np.asarray(xs)[None, :], ts[:, None])
        rows.extend((r, t, x, eta[j, i]) for j, t in enumerate(ts) for i, x in enumerate(xs))
        swh.append(realized_significant_height(real, args.window, args.dt))
    atomic_write(out / "wave.csv", csv_text(["realization", "t_s", "x_m", "eta_m"], rows))
    summary = {
        "h_s": sea.h_s, "t_p": sea.t_p, "convention": conv.value, "seed": seed,
        "n_components": grid.n_components, "omega_max_rad_s": float(grid.omegas[-1]),
        "realized_swh_m": swh, "mean_realized_swh_m": float(np.mean(swh)),
    }
    atomic_write(out / "wave_summary.json", json_text(summary))
    config = {**summary, "x_m": xs, "window_s": args.window, "dt_s": args.dt,
              "realizations": args.realizations}
    for k in ("realized_swh_m", "mean_realized_swh_m", "n_components", "omega_max_rad_s"):
        config.pop(k)
    write_manifest(out, "wave", config, seed, ["wave.csv", "wave_summary.json"],
                   time.perf_counter() - t0)
    print(json.dumps({"mean_realized_swh_m": summary["mean_realized_swh_m"]}))


def cmd_los(args):
    sc = _scenario(args)
    stats = run_los(sc, args.out, workers=args.threads, n_timelines=args.timelines)
    print(json.dumps({"p_los": stats.p_los, "mu_clos_s": stats.mu_clos_s,
                      "sigma_clos_s": stats.sigma_clos_s, "gamma_clos_s": stats.gamma_clos_s}))


def _pattern(name):
    if name in REFERENCE_PATTERNS and name != "dipole":
        return reference_pattern(name)
    if name == "dipole":
        return ElevationPattern()
    return load_pattern_csv(name)


def cmd_antenna(args):
    out = prepare_output_dir(args.out)
    t0 = time.perf_counter()
    sea, seed, conv = _sea_from_args(args)
    grid = build_spectrum_grid(sea)
    pattern = _pattern(args.pattern)
    tilt_rows, gain_rows, peak = [], [], []
    for r in range(args.realizations):
        real = sample_realization(grid, realization_seed(seed, r), conv)
        ts = tilt_series(real, args.x, args.window, args.dt, args.half_width)
        norm = required_length(1.0, ts.theta_deg)
        tilt_rows.extend(zip(ts.t_s, ts.theta_deg, norm))
        gain_rows.extend(zip(ts.theta_deg, np.atleast_1d(pattern(ts.theta_deg))))
        peak.append(ts.max_abs_deg)
    atomic_write(out / "tilt.csv", csv_text(["t_s", "theta_deg", "normalized_length"], tilt_rows))
    atomic_write(out / "gain.csv", csv_text(["theta_deg", "dbi"], gain_rows))
    all_theta = np.array([row[0] for row in gain_rows])
    gmin, gmax = gain_excursion(pattern, all_theta)
    max_tilt = max(peak)
    summary = {"max_abs_tilt_deg": max_tilt, "max_normalized_length": required_length(1.0, max_tilt),
               "gain_min_dbi": gmin, "gain_max_dbi": gmax, "pattern": pattern.name}
    config = {"h_s": sea.h_s, "t_p": sea.t_p, "convention": conv.value, "x_m": args.x,
              "window_s": args.window, "dt_s": args.dt, "half_width_m": args.half_width,
              "realizations": args.realizations, "pattern": args.pattern}
    write_manifest(out, "antenna", config, seed, ["tilt.csv", "gain.csv"], time.perf_counter() - t0)
    print(json.dumps(summary))


def cmd_power(args):
    a = PaAssumptions(args.pae, args.pin, args.il, args.gain, args.pbo, args.drive)
    if (args.eirp is None) == (args.dc_mw is None):
        raise ConfigError("give exactly one of --eirp or --dc-mw")
    if args.eirp is not None:
        res = {"eirp_dbm": args.eirp, "pa_dc_mw": pa_dc_power_mw(args.eirp, a)}
    else:
        res = {"pa_dc_mw": args.dc_mw, "eirp_dbm": eirp_dbm(args.dc_mw, a)}
    res.update(pae=a.pae_fraction, pa_input_dbm=a.pa_input_dbm, switch_loss_db=a.switch_loss_db,
               antenna_gain_dbi=a.antenna_gain_dbi, backoff_db=a.backoff_db, drive=a.drive)
    print(json.dumps(res))


def cmd_sweep(args):
    sc = _scenario(args)
    curve = run_sweep(sc, args.axis, _floats(args.values), args.out, workers=args.threads)
    for v, s in curve:
        print(f"{v:g}\t{s.p_los:.5f}")


def cmd_regress(args):
    out = prepare_output_dir(args.out)
    t0 = time.perf_counter()
    seed = 0 if args.seed is None else args.seed
    report = regression_harness(n_realizations=args.n_realizations, calibration_n=args.calibration_n,
                                master_seed=seed, workers=args.threads,
                                monotonicity_n=args.monotonicity_n)
    atomic_write(out / "regression.json", json_text(report))
    config = {"n_realizations": args.n_realizations, "calibration_n": args.calibration_n,
              "monotonicity_n": args.monotonicity_n}
    write_manifest(out, "regress", config, seed, ["regression.json"], time.perf_counter() - t0)
    print(format_report(report))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=os.environ.get(OUT_ENV, "."),
                        help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes; changes speed only, never results")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="buoylink", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dielectric", parents=[common], help="permittivity and penetration depth")
    d.add_argument("--medium", choices=[m.value for m in diel.Medium], default="sea_water")
    d.add_argument("--temperature", type=float, default=20.0, help="degC")
    d.add_argument("--salinity", type=float, default=None, help="g/kg (default 35 for sea water)")
    g = d.add_mutually_exclusive_group()
    g.add_argument("--freqs", help="comma separated GHz values")
    g.add_argument("--sweep", nargs=3, metavar=("FMIN", "FMAX", "N"),
                   default=("0.1", "100", "61"), help="log-spaced sweep in GHz")
    d.set_defaults(func=cmd_dielectric)

    def sea_args(sp):
        sp.add_argument("--config", help="scenario file (hs_m/tp_s/seed/convention are used)")
        sp.add_argument("--hs", type=float, help="significant wave height, m")
        sp.add_argument("--tp", type=float, help="peak period, s")
        sp.add_argument("--convention", default="energy_conserving",
                        choices=[c.value for c in AmplitudeConvention])
        sp.add_argument("--window", type=float, default=60.0)
        sp.add_argument("--dt", type=float, default=0.1)
        sp.add_argument("--realizations", type=int, default=1)

    w = sub.add_parser("wave", parents=[common], help="surface elevation traces")
    sea_args(w)
    w.add_argument("--x", default="0", help="comma separated positions, m")
    w.set_defaults(func=cmd_wave)

    los = sub.add_parser("los", parents=[common], help="LoS Monte Carlo for one scenario")
    los.add_argument("--config", required=True)
    los.add_argument("--timelines", type=int, default=0,
                     help="also write timeline.csv for the first N realizations")
    los.set_defaults(func=cmd_los)

    a = sub.add_parser("antenna", parents=[common], help="tilt, antenna length and gain")
    sea_args(a)
    a.add_argument("--x", type=float, default=0.0, help="buoy position, m")
    a.add_argument("--half-width", type=float, default=1.0, help="slope stencil half-width, m")
    a.add_argument("--pattern", default="dipole",
                   help=f"one of {', '.join(REFERENCE_PATTERNS)} or an angle_deg,dbi CSV path")
    a.set_defaults(func=cmd_antenna)

    pw = sub.add_parser("power", parents=[common], help="PA DC power <-> EIRP")
    pw.add_argument("--eirp", type=float, help="target EIRP, dBm")
    pw.add_argument("--dc-mw", type=float, help="PA DC power, mW")
    pw.add_argument("--pae", type=float, default=0.4)
    pw.add_argument("--pin", type=float, default=0.0, help="PA input drive, dBm")
    pw.add_argument("--il", type=float, default=1.0, help="switch insertion loss, dB")
    pw.add_argument("--gain", type=float, default=0.0, help="antenna gain, dBi")
    pw.add_argument("--pbo", type=float, default=6.0, help="power back-off, dB")
    pw.add_argument("--drive", choices=["db", "linear"], default="db")
    pw.set_defaults(func=cmd_power)

    s = sub.add_parser("sweep", parents=[common], help="P_LoS curve along one parameter")
    s.add_argument("--config", required=True)
    s.add_argument("--axis", required=True, choices=[x.value for x in SweepAxis])
    s.add_argument("--values", required=True, help="comma separated values")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("regress", parents=[common], help="Table-I regression harness")
    r.add_argument("--n-realizations", type=int, default=1000)
    r.add_argument("--calibration-n", type=int, default=200)
    r.add_argument("--monotonicity-n", type=int, default=200)
    r.set_defaults(func=cmd_regress)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "dielectric" and args.salinity is None:
        args.salinity = 35.0 if args.medium == "sea_water" else 0.0
    try:
        args.func(args)
    except (ConfigError, DomainError, RefinementError) as e:
        print(f"buoylink {args.command}: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"buoylink {args.command}: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
