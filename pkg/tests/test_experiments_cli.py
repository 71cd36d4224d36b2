import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ui_lab import __version__
from ui_lab.cli import main
from ui_lab.errors import ConfigError
from ui_lab.experiments import (PROTOCOLS, ExperimentConfig, ResultTable, Sweep, point_seed,
                                run_experiment)
from ui_lab.noise import averaged_rates_closed
from ui_lab.protocols import analytic_two_ref
from ui_lab.recovery import cumulative_success

MINIMAL = {
    "two_ref": {"alpha1": 1.0, "alpha2": -1.0},
    "multi_ref": {"m": 3, "ref_amps": [[0, 0], [2, 0], [0, 2]]},
    "weak": {"N": 3, "alpha1": 1.0, "alpha2": 0.0},
    "recovery_rounds": {"delta": 2.0, "rounds": [1, 2, 3]},
    "same_unknown": {"alpha1": 1.0, "alpha2": -1.0},
    "splitting_compare": {"delta": 2.0, "N": [1, 2]},
    "noise_rates": {"sigma": 0.2, "xi": 1.0},
    "optimality_sweep": {"delta": 2.0},
    "gaussian_integral_check": {"m": 1, "a": 1.0, "b": 1.0, "x": [0.5, 0.1], "sigma": 0.3},
}


def _read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_every_protocol_has_a_minimal_config():
    assert set(MINIMAL) == set(PROTOCOLS)


@pytest.mark.parametrize("name", sorted(MINIMAL))
def test_each_protocol_runs_analytic(name):
    table = run_experiment(ExperimentConfig(name, MINIMAL[name]))
    assert len(table) == 1
    assert not any(c.startswith(("mc_", "se_")) for c in table.columns)


def test_config_round_trip():
    cfg = ExperimentConfig("two_ref", {"delta": 1.5}, shots=10, seed=3,
                           sweep=Sweep("delta", 0.0, 2.0, 5))
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    assert ExperimentConfig.from_dict(cfg.to_dict()).sweep.values().tolist() == [0, 0.5, 1, 1.5, 2]


@pytest.mark.parametrize("raw,key", [
    ({"protocol": "nope"}, "protocol"),
    ({"protocol": "two_ref", "shots": -1}, "shots"),
    ({"protocol": "two_ref", "seed": 1.5}, "seed"),
    ({"protocol": "two_ref", "extra": 1}, "extra"),
    ({"protocol": "two_ref", "sweep": {"parameter": "delta", "min": 0, "max": 1}}, "sweep.steps"),
    ({"protocol": "two_ref", "sweep": {"parameter": "delta", "min": 0, "max": 1, "steps": 0}},
     "sweep.steps"),
    ({"shots": 3}, "protocol"),
])
def test_config_errors_name_the_key(raw, key):
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(raw)
    assert exc.value.key == key


def test_missing_parameter_is_a_config_error():
    with pytest.raises(ConfigError) as exc:
        run_experiment(ExperimentConfig("noise_rates", {"sigma": 0.1}))
    assert exc.value.key == "xi"


def test_two_ref_sweep_matches_closed_form():
    cfg = ExperimentConfig("two_ref", {"alpha2": 0.0}, sweep=Sweep("alpha1", 0.0, 3.0, 7))
    table = run_experiment(cfg)
    for a1, p in zip(table.columns["alpha1"], table.columns["P"]):
        assert p == pytest.approx(analytic_two_ref(1, 1, 1, 0.5, a1, 0.0)[2], abs=1e-15)


def test_recovery_rounds_sweep_has_five_series():
    cfg = ExperimentConfig("recovery_rounds", {"rounds": [1, 2, 3, 4, 5]},
                           sweep=Sweep("delta", 0.0, 6.0, 120))
    table = run_experiment(cfg)
    series = [c for c in table.columns if c.startswith("P_round_")]
    assert len(series) == 5 and len(table) == 120
    d = np.array(table.columns["delta"])
    assert np.allclose(table.columns["P_round_3"], cumulative_success(3, d), atol=1e-15)


def test_noise_rates_xi_sweep():
    cfg = ExperimentConfig("noise_rates", {"sigma": 0.25}, sweep=Sweep("xi", 0.2, 2.0, 10))
    table = run_experiment(cfg)
    r = np.array(table.columns["R"])
    assert np.all(np.diff(r) > 0)
    assert r[-1] == pytest.approx(averaged_rates_closed(1, 1, 0.25, 2.0).reliability, abs=1e-15)


def test_monte_carlo_columns_and_worker_independence():
    cfg = ExperimentConfig("two_ref", {"alpha2": 0.0}, shots=20_000, seed=5,
                           sweep=Sweep("alpha1", 0.5, 2.0, 4))
    serial = run_experiment(cfg)
    threaded = run_experiment(cfg, workers=4)
    assert serial.columns == threaded.columns
    for p, mc, se in zip(serial.columns["P"], serial.columns["mc_P"], serial.columns["se_P"]):
        assert abs(mc - p) < 4 * se + 1e-12
    assert all(e == 0 for e in serial.columns["mc_P_error"])


def test_point_seeds_differ():
    seeds = {point_seed(7, i) for i in range(100)}
    assert len(seeds) == 100
    assert point_seed(7, 3) == point_seed(7, 3)


def test_result_table_output():
    with pytest.raises(ValueError):
        ResultTable({"mc_P": [0.1]}, {})
    t = ResultTable({"x": [1, 2], "y": [0.1, math.nan]}, {"seed": 1})
    header, rows = _read_csv(t.to_csv())
    assert header == ["x", "y"] and rows[0] == [1.0, 0.1] and math.isnan(rows[1][1])
    doc = json.loads(t.to_json())
    assert doc["columns"]["y"] == [0.1, None]
    with pytest.raises(ConfigError):
        t.render("xml")


def test_metadata_echo():
    cfg = ExperimentConfig("optimality_sweep", {"delta": 1.0}, seed=11)
    meta = run_experiment(cfg).metadata
    assert meta["config"] == cfg.to_dict() and meta["seed"] == 11
    assert meta["version"] == __version__


def test_optimality_sweep_modes():
    row = run_experiment(ExperimentConfig("optimality_sweep", {"delta": 0.0})).columns
    assert math.isnan(row["l1_opt"][0]) and row["P_opt"][0] == 0
    row = run_experiment(ExperimentConfig("optimality_sweep", {"delta": 2.0, "l1": 0.2})).columns
    assert row["l2_saturated"][0] == pytest.approx(0.6 / 1.4)


# --------------------------------------------------------------------------
# command line


def test_cli_csv_to_stdout(capsys):
    assert main(["two_ref", "--set", "alpha1=2.0", "--set", "alpha2=0"]) == 0
    header, rows = _read_csv(capsys.readouterr().out)
    assert header == ["P1", "P2", "P"]
    assert rows[0][2] == pytest.approx(1 - math.exp(-4 / 3), abs=1e-15)


def test_cli_config_file_and_json_out(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"protocol": "noise_rates",
                               "parameters": {"sigma": 0.2, "xi": 1.0}, "shots": 5000}))
    out = tmp_path / "out.json"
    assert main(["noise_rates", "--config", str(cfg), "--format", "json", "--out", str(out),
                 "--seed", "4"]) == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["seed"] == 4
    assert {"mc_R", "se_R"} <= set(doc["columns"])


def test_cli_seed_precedence(monkeypatch, capsys):
    args = ["two_ref", "--set", "alpha1=1", "--set", "alpha2=0", "--shots", "2000",
            "--format", "json"]
    monkeypatch.setenv("UI_LAB_SEED", "9")
    assert main(args) == 0
    assert json.loads(capsys.readouterr().out)["metadata"]["seed"] == 9
    assert main(args + ["--seed", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["metadata"]["seed"] == 2
    monkeypatch.setenv("UI_LAB_SEED", "x")
    assert main(args) == 2


def test_cli_protocol_mismatch(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"protocol": "weak"}))
    assert main(["two_ref", "--config", str(cfg)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and err["key"] == "protocol"


def test_cli_domain_error_exit_code(capsys):
    assert main(["noise_rates", "--set", "sigma=-1", "--set", "xi=1"]) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "DomainError"


def test_cli_bad_set(capsys):
    assert main(["two_ref", "--set", "novalue"]) == 2


def test_cli_subprocess_verify_reports_the_recursion_failure():
    proc = subprocess.run([sys.executable, "-m", "ui_lab.cli", "verify"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    fails = [ln for ln in proc.stdout.splitlines() if ln.startswith("FAIL")]
    assert len(fails) == 1 and "printed" in fails[0]


def test_cli_subprocess_missing_key():
    proc = subprocess.run([sys.executable, "-m", "ui_lab.cli", "weak", "--set", "alpha1=1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["key"] == "N"
