import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import small_config
from spatialepi import output
from spatialepi.config import (SimulationConfig, emit_config, load_config,
                               parse_config, set_key)
from spatialepi.errors import ConfigurationError
from spatialepi.scenarios import run_scenario


def test_empty_config_is_benchmark_defaults():
    cfg = parse_config("")
    assert cfg == SimulationConfig()
    cfg.validate()


def test_defaults_match_calibration_table():
    cfg = SimulationConfig()
    assert cfg.population.n == 26600
    assert cfg.run.initial_infected == 30
    assert cfg.contagion.radius == 0.00805
    assert cfg.contagion.mu == 0.028175
    assert cfg.contagion.prob_home == 0.064
    assert cfg.contagion.prob_out == 0.032
    assert cfg.transitions.nu == 0.09
    assert cfg.transitions.rho == 0.05
    assert cfg.transitions.delta_young == 0.000533
    assert cfg.transitions.delta_old == 0.00533
    assert cfg.behavior.phi == 0.88
    assert cfg.behavior.ibar_firms == 0.00062
    assert cfg.population.group_quarter.size == 50


def test_round_trip_semantically_identical():
    cfg = SimulationConfig()
    set_key(cfg, "population.n", "5000")
    set_key(cfg, "policy.scope", "neighborhood")
    set_key(cfg, "policy.t_lock", "0.05")
    set_key(cfg, "policy.t_open", "0.02")
    set_key(cfg, "neighborhoods.count", "9")
    set_key(cfg, "contagion.mu", "0.0123")
    set_key(cfg, "behavior.enabled", "false")
    text = emit_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert emit_config(again) == text


def test_unknown_key_line_numbered():
    with pytest.raises(ConfigurationError, match=r"cfg:2: unknown key"):
        parse_config("run.seed = 1\ncontagion.bogus = 2\n", origin="cfg")


def test_malformed_line_diagnostic():
    with pytest.raises(ConfigurationError, match=r"cfg:1: expected"):
        parse_config("this is not a key value pair", origin="cfg")


def test_bad_value_diagnostic():
    with pytest.raises(ConfigurationError, match=r"cfg:1: bad value"):
        parse_config("run.seed = abc", origin="cfg")
    with pytest.raises(ConfigurationError, match="one of"):
        parse_config("geometry.boundary = bounce", origin="cfg")


def test_comments_and_blanks_ignored():
    cfg = parse_config("# comment\n\nrun.seed = 9  # trailing\n")
    assert cfg.run.seed == 9


@pytest.mark.parametrize("text", [
    "population.shares.young = 0.9",        # shares no longer sum to 1
    "policy.scope = global\npolicy.t_lock = 0.05\npolicy.t_open = 0.10",
    "transitions.nu = 0.7\ntransitions.rho = 0.6",
    "neighborhoods.count = 7",
    "neighborhoods.gradient = true\nneighborhoods.count = 16",
    "run.initial_infected = 999999",
])
def test_validation_rejects(text):
    cfg = parse_config(text)
    with pytest.raises(ConfigurationError):
        cfg.validate()


def test_workplace_side_area_switch():
    cfg = parse_config("geometry.workplace_side = 0.003304\n"
                       "geometry.workplace_side_is_area = true\n")
    assert abs(cfg.geometry.side() - 0.003304 ** 0.5) < 1e-15


def _tiny_result(tmp_path, seed=7):
    cfg = small_config(n=1200, reps=2, seed=seed, max_days=80)
    return run_scenario(cfg)


def test_timeseries_csv_schema(tmp_path):
    res = _tiny_result(tmp_path)
    path = tmp_path / "ts.csv"
    output.write_timeseries_csv(path, res.averaged)
    raw = path.read_bytes()
    assert b"\r" not in raw                      # LF endings
    lines = raw.decode("utf-8").splitlines()
    assert lines[0].split(",") == output.TIMESERIES_COLUMNS
    # the invariant holds exactly on the data; serialized values carry
    # 6 significant digits, so the read-back sums are 1 to ~1e-6
    for g in range(4):
        sums = res.averaged.frac[:, g, :].sum(axis=1)
        assert np.abs(sums - 1.0).max() < 1e-9
    data = np.genfromtxt(path, delimiter=",", names=True)
    for g in ("all", "young", "notemp", "old"):
        total = sum(data[f"{g}_{s}"] for s in ("s", "a", "y", "r", "d"))
        assert np.abs(total - 1.0).max() < 2e-6
    active = data["all_a"] + data["all_y"]
    assert np.abs(active - data["active_all"]).max() < 2e-6


def test_steady_and_events_csv(tmp_path):
    res = _tiny_result(tmp_path)
    spath = tmp_path / "steady.csv"
    output.write_steady_csv(spath, res)
    lines = spath.read_text().splitlines()
    assert lines[0].split(",") == output.STEADY_COLUMNS
    assert len(lines) == 5                        # header + all/young/notemp/old
    epath = tmp_path / "events.csv"
    output.write_events_csv(epath, [(3, 0, "lock"), (9, 0, "reopen")])
    assert epath.read_text() == "day,unit,event\n3,0,lock\n9,0,reopen\n"


def test_six_significant_digits():
    assert output._fmt(0.123456789) == "0.123457"
    assert output._fmt(1 / 3) == "0.333333"
    assert output._fmt(5) == "5"


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "spatialepi.cli", *args],
                          cwd=cwd, capture_output=True, text=True)


def test_cli_run_deterministic(tmp_path):
    cfg_file = tmp_path / "small.cfg"
    cfg_file.write_text("population.n = 1200\nrun.replications = 2\n"
                        "run.max_days = 80\nrun.seed = 7\n")
    for sub in ("a", "b"):
        r = run_cli(["run", "--config", str(cfg_file), "--out", str(tmp_path / sub)],
                    cwd=tmp_path)
        assert r.returncode == 0, r.stderr
    for name in ("timeseries.csv", "steady_state.csv", "events.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_worker_count_invariance(tmp_path):
    cfg_file = tmp_path / "small.cfg"
    cfg_file.write_text("population.n = 1200\nrun.replications = 3\n"
                        "run.max_days = 80\nrun.seed = 3\n")
    for sub, workers in (("w1", "1"), ("w2", "2")):
        r = run_cli(["run", "--config", str(cfg_file), "--workers", workers,
                     "--out", str(tmp_path / sub)], cwd=tmp_path)
        assert r.returncode == 0, r.stderr
    for name in ("timeseries.csv", "steady_state.csv", "events.csv"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()


def test_cli_malformed_config_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("run.seed = 1\nnot a config line\n")
    r = run_cli(["run", "--config", str(bad)], cwd=tmp_path)
    assert r.returncode == 2
    assert "bad.cfg:2" in r.stderr


def test_cli_nonconverged_warning(tmp_path):
    cfg_file = tmp_path / "short.cfg"
    cfg_file.write_text("population.n = 1200\nrun.replications = 1\nrun.max_days = 5\n")
    out = tmp_path / "out"
    r = run_cli(["run", "--config", str(cfg_file), "--out", str(out)], cwd=tmp_path)
    assert r.returncode == 0
    assert "non-converged" in r.stderr
    steady = (out / "steady_state.csv").read_text()
    assert "nonconverged:1" in steady


def test_cli_snapshot_positions(tmp_path):
    cfg_file = tmp_path / "small.cfg"
    cfg_file.write_text("population.n = 1200\nrun.replications = 1\nrun.max_days = 30\n")
    out = tmp_path / "out"
    r = run_cli(["run", "--config", str(cfg_file), "--snapshot-day", "10",
                 "--out", str(out)], cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    lines = (out / "positions.csv").read_text().splitlines()
    assert lines[0] == ",".join(output.POSITIONS_COLUMNS)
    assert len(lines) == 1201   # header + one row per agent


def test_cli_sweep(tmp_path):
    cfg_file = tmp_path / "small.cfg"
    cfg_file.write_text("population.n = 1200\nrun.replications = 1\nrun.max_days = 60\n")
    out = tmp_path / "out"
    r = run_cli(["sweep", "transitions.nu", "--values", "0.09,0.12",
                 "--config", str(cfg_file), "--out", str(out)], cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    assert (out / "sweep_steady_state.csv").exists()
    assert (out / "sweep_manifest.csv").exists()
    assert (out / "sweep_0_09_timeseries.csv").exists()
