import json
from pathlib import Path

import numpy as np
import pytest

from memhr import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def small_config(tmp_path):
    doc = json.loads((CONFIGS / "typical.json").read_text())
    doc["grid"] = {"lengths": [1.0], "cells": [16]}
    doc["stepper"].update(dt=0.05, t_end=5.0, monitor_stride=10)
    doc["ensemble"]["n_runs"] = 2
    doc["verify"].update(ode_t_end=1.0, ode_dt=1e-3, ode_oracle_dt=1e-5, ode_tol=1e-3)
    doc["outputs"] = {}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_bounds_prints_full_set(small_config, capsys, tmp_path):
    assert cli.main(["bounds", "--config", str(small_config), "--out", str(tmp_path / "b.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    b = out["bounds"]
    assert b["C1"] == 30.0 and b["lam"] == 0.001
    for key in ("C2", "C3", "M", "K", "Q", "L", "R", "G", "Phi", "D", "H2_bound", "T0"):
        assert key in b
    assert "eta" in out["annotations"]
    assert json.loads((tmp_path / "b.json").read_text()) == out


def test_bounds_overrides(small_config, capsys):
    cli.main(["bounds", "--config", str(small_config), "--omega", "2", "--b-norm", "0"])
    b = json.loads(capsys.readouterr().out)["bounds"]
    assert b["omega_measure"] == 2.0 and b["T0"] == 0.0


def test_oracle_csv(small_config, tmp_path):
    out = tmp_path / "o.csv"
    assert cli.main(["oracle", "--config", str(small_config), "--t-end", "1", "--dt", "0.01",
                     "--stride", "10", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "t,u,v,w,rho"
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (11, 5) and data[-1, 0] == pytest.approx(1.0)


def test_simulate_writes_monitor(small_config, tmp_path):
    out = tmp_path / "m.csv"
    assert cli.main(["simulate", "--config", str(small_config), "--monitor", str(out), "--t-end", "1"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,energy") and len(lines) == 1 + 1 + 2


def test_verify_exit_zero_and_report(small_config, tmp_path, capsys):
    report = tmp_path / "r.json"
    assert cli.main(["verify", "--config", str(small_config), "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["all_pass"] is True
    names = {c["name"] for c in doc["checks"]}
    assert {"gronwall", "absorbing", "l4", "ode_equivalence"} <= names
    assert "PASS" in capsys.readouterr().out


def test_verify_exit_nonzero_on_failure(small_config, tmp_path):
    doc = json.loads(small_config.read_text())
    doc["verify"]["ode_tol"] = 1e-30
    small_config.write_text(json.dumps(doc))
    assert cli.main(["verify", "--config", str(small_config), "--report", str(tmp_path / "r.json")]) == 1


def test_config_error_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert cli.main(["bounds", "--config", str(bad)]) == 2
    assert "missing required keys" in capsys.readouterr().err


def test_sweep(small_config, tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    code = cli.main(["sweep", "--config", str(small_config), "--param", "k1", "--values", "0.5,0.9",
                     "--out-dir", str(out_dir), "--t-end", "2"])
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert [r["value"] for r in summary["rows"]] == [0.5, 0.9]
    assert (out_dir / "k1=0.5" / "report.json").exists()


def test_sweep_invalid_value(small_config, tmp_path):
    code = cli.main(["sweep", "--config", str(small_config), "--param", "b", "--values", "-1",
                     "--out-dir", str(tmp_path / "s")])
    assert code == 2
