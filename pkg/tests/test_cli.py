import json
import subprocess
import sys

import pytest

from buoylink.cli import main

SCEN = "hs_m: 0.5\ntp_s: 2\nha_m: 0\nhtwr_m: 30\nd_m: 1000\nn_realizations: 3\nseed: 11\n"


@pytest.fixture
def scen(tmp_path):
    p = tmp_path / "scenario.yaml"
    p.write_text(SCEN)
    return p


def _manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_dielectric(tmp_path):
    assert main(["dielectric", "--out", str(tmp_path), "--freqs", "1,10"]) == 0
    rows = (tmp_path / "dielectric.csv").read_text().splitlines()
    assert rows[0] == "f_ghz,eps_real,eps_imag,delta_m,att_db_per_m" and len(rows) == 3
    assert 0.005 <= float(rows[1].split(",")[3]) <= 0.02
    assert _manifest(tmp_path)["config"]["salinity_ppt"] == 35.0


def test_dielectric_domain_error(tmp_path, capsys):
    assert main(["dielectric", "--out", str(tmp_path), "--medium", "ice", "--temperature", "5"]) == 2
    assert "ice" in capsys.readouterr().err.lower()


def test_wave(tmp_path, capsys):
    assert main(["wave", "--out", str(tmp_path), "--hs", "1", "--tp", "4", "--x", "0,10",
                 "--window", "2", "--realizations", "2"]) == 0
    lines = (tmp_path / "wave.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 20 * 2
    assert "mean_realized_swh_m" in json.loads(capsys.readouterr().out)
    assert (tmp_path / "wave_summary.json").is_file()


def test_wave_needs_sea(tmp_path):
    assert main(["wave", "--out", str(tmp_path), "--hs", "1"]) == 2


def test_los_and_seed_override(tmp_path, scen, capsys):
    assert main(["los", "--config", str(scen), "--out", str(tmp_path / "a")]) == 0
    res = json.loads(capsys.readouterr().out)
    assert 0 <= res["p_los"] <= 1
    assert main(["los", "--config", str(scen), "--out", str(tmp_path / "b"), "--seed", "12"]) == 0
    assert _manifest(tmp_path / "b")["seed"] == 12


def test_los_threads_do_not_change_bytes(tmp_path, scen):
    main(["los", "--config", str(scen), "--out", str(tmp_path / "t1"), "--threads", "1"])
    main(["los", "--config", str(scen), "--out", str(tmp_path / "t2"), "--threads", "2"])
    assert (tmp_path / "t1/stats.json").read_bytes() == (tmp_path / "t2/stats.json").read_bytes()


def test_out_dir_from_environment(tmp_path, scen, monkeypatch):
    monkeypatch.setenv("BUOYLINK_OUT_DIR", str(tmp_path / "env"))
    from buoylink.cli import build_parser

    args = build_parser().parse_args(["los", "--config", str(scen)])
    assert args.out == str(tmp_path / "env")


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("hs_m: 4\ntp_s: 2\nha_m: 0\nhtwr_m: 30\nd_m: 1000\n")
    assert main(["los", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "breaking" in capsys.readouterr().err


def test_unwritable_out_exit_code(tmp_path, scen):
    f = tmp_path / "f"
    f.write_text("")
    assert main(["los", "--config", str(scen), "--out", str(f / "sub")]) == 3


def test_antenna(tmp_path, capsys):
    assert main(["antenna", "--out", str(tmp_path), "--hs", "2", "--tp", "8", "--window", "5"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["gain_max_dbi"] <= 2.16 and res["max_normalized_length"] >= 1
    assert (tmp_path / "tilt.csv").read_text().startswith("t_s,theta_deg,normalized_length\n")
    assert (tmp_path / "gain.csv").read_text().startswith("theta_deg,dbi\n")


def test_antenna_table_coverage_error(tmp_path):
    # two-point table stops at 17.66 deg; a steep sea exceeds it
    code = main(["antenna", "--out", str(tmp_path), "--hs", "10", "--tp", "13",
                 "--pattern", "bicone", "--realizations", "5"])
    assert code == 2


def test_power(capsys):
    assert main(["power", "--eirp", "20"]) == 0
    res = json.loads(capsys.readouterr().out.strip())
    assert res["pa_dc_mw"] == pytest.approx(1253, abs=1)
    assert main(["power", "--dc-mw", "2500"]) == 0
    assert json.loads(capsys.readouterr().out)["eirp_dbm"] == pytest.approx(23, abs=0.05)
    assert main(["power"]) == 2


def test_sweep(tmp_path, scen):
    assert main(["sweep", "--config", str(scen), "--out", str(tmp_path),
                 "--axis", "d", "--values", "500,1000"]) == 0
    assert len((tmp_path / "curve.csv").read_text().splitlines()) == 3


def test_console_script_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "buoylink.cli", "power", "--eirp", "23"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["pa_dc_mw"] == pytest.approx(2500, abs=1)


def test_regress_small(tmp_path, capsys):
    assert main(["regress", "--out", str(tmp_path), "--n-realizations", "1",
                 "--calibration-n", "0", "--monotonicity-n", "1"]) == 0
    rep = json.loads((tmp_path / "regression.json").read_text())
    assert len(rep["rows"]) == 9 and "monotonicity" in rep
    assert "overall" in capsys.readouterr().out
