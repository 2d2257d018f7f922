import json
from pathlib import Path

import pytest

from dimerlaser import cli, model
from dimerlaser.cli import build_parser, main, parse_config
from dimerlaser.model import ParameterError


def parse(argv):
    return parse_config(build_parser().parse_args(argv))


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------


def test_defaults_resolve():
    cfg = parse(["trajectory", "--out", "x"])
    assert cfg.experiment == "trajectory"
    assert cfg.params == model.reference_params()
    assert cfg.values["P_over_P0"] == 6.02
    assert cfg.seed == 1
    assert cfg.lanes >= 1


def test_set_overrides_physics():
    cfg = parse(["trajectory", "--out", "x", "--set", "beta=0.0017"])
    assert cfg.params.beta == 0.0017
    # only the named key changes
    assert cfg.params.kappa == model.reference_params().kappa


def test_set_overrides_run_key():
    cfg = parse(["stationary", "--out", "x", "--set", "n_traj=7", "--set", "t_window=3.5"])
    assert cfg.values["n_traj"] == 7
    assert cfg.values["t_window"] == 3.5


def test_unknown_key_names_closest():
    with pytest.raises(ParameterError, match="kappa"):
        parse(["trajectory", "--out", "x", "--set", "kapa=1.0"])


def test_bad_value_reports_key():
    with pytest.raises(ParameterError, match="n_traj"):
        parse(["stationary", "--out", "x", "--set", "n_traj=lots"])


def test_seed_flag_overrides_config():
    cfg = parse(["trajectory", "--out", "x", "--set", "seed=5", "--seed", "9"])
    assert cfg.seed == 9


def test_params_file_loads(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text(model.dump_params(model.reference_params(1.7e-5)) + "n_traj = 3\n")
    cfg = parse(["stationary", "--params", str(path), "--out", "x"])
    assert cfg.params.beta == 1.7e-5
    assert cfg.values["n_traj"] == 3


def test_missing_params_file():
    with pytest.raises(ParameterError, match="not found"):
        parse(["trajectory", "--params", "/no/such/file", "--out", "x"])


def test_env_var_sets_default_lanes(monkeypatch):
    monkeypatch.setenv(cli.LANES_ENV, "3")
    cfg = parse(["trajectory", "--out", "x"])
    assert cfg.lanes == 3
    cfg = parse(["trajectory", "--out", "x", "--lanes", "1"])
    assert cfg.lanes == 1


# ---------------------------------------------------------------------------
# drivers through main()
# ---------------------------------------------------------------------------


def test_trajectory_smoke(tmp_path):
    out = tmp_path / "run"
    code = main(["trajectory", "--out", str(out), "--seed", "4",
                 "--set", "n_steps=1000", "--set", "record_stride=5"])
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    data_rows = [ln for ln in lines if not ln.startswith("#") and not ln.startswith("t,")]
    assert len(data_rows) == 1000 // 5 + 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 4
    assert manifest["params_hash"] == model.params_hash(model.reference_params())
    assert "trajectory.csv" in manifest["artifacts"]


def test_bifurcation_table_lists_pumps(tmp_path):
    out = tmp_path / "bif"
    code = main(["bifurcation", "--out", str(out),
                 "--set", "pump_list=6.008,6.0225,6.046",
                 "--set", "dt=5e-5", "--set", "t_transient=40", "--set", "t_window=5"])
    assert code == 0
    rows = (out / "bifurcation.csv").read_text().splitlines()
    assert len(rows) == 4
    assert rows[1].startswith("6.008,")
    assert "fixed_point" in rows[1] or "limit_cycle" in rows[1]


def test_beta_sweep_two_rows(tmp_path):
    out = tmp_path / "bs"
    code = main(["beta-sweep", "--out", str(out),
                 "--set", "beta_list=0.017,0.0017",
                 "--set", "pump_list=6.016,6.028", "--set", "n_traj=4",
                 "--set", "dt=1e-4", "--set", "t_transient=2", "--set", "t_window=4"])
    assert code == 0
    rows = (out / "beta_sweep.csv").read_text().splitlines()
    assert len(rows) == 3


def test_reproducible_artifacts(tmp_path):
    argv_base = ["trajectory", "--seed", "11", "--set", "n_steps=400",
                 "--set", "record_stride=4"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(argv_base + ["--out", str(out1)]) == 0
    assert main(argv_base + ["--out", str(out2)]) == 0
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    m1.pop("timestamp"), m2.pop("timestamp")
    assert m1 == m2


def test_config_echo_round_trips(tmp_path):
    out1 = tmp_path / "first"
    argv = ["bifurcation", "--out", str(out1),
            "--set", "pump_list=6.008,6.046", "--set", "dt=1e-4",
            "--set", "t_transient=5", "--set", "t_window=2"]
    assert main(argv) == 0
    echo = out1 / "resolved_params.txt"
    assert echo.exists()
    out2 = tmp_path / "second"
    assert main(["bifurcation", "--params", str(echo), "--out", str(out2)]) == 0
    assert (out1 / "bifurcation.csv").read_bytes() == (out2 / "bifurcation.csv").read_bytes()


def test_driver_failure_reports(tmp_path):
    out = tmp_path / "fail"
    code = main(["ramp", "--out", str(out), "--set", "bin_width=-1", "--set", "n_traj=2"])
    assert code == 1
    report = json.loads((out / "error.json").read_text())
    assert report["experiment"] == "ramp"


def test_parse_error_exit_code():
    assert main(["trajectory", "--out", "zzz", "--set", "nonsense=1"]) == 2
