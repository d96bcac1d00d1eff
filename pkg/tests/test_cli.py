import json

import pytest

from relaymec.cli import main

BASE = {
    "a": 0.001, "qc_r": 0.05, "qc_h": 0.05, "p_max_mw": 10,
    "channel": {"type": "rayleigh", "gamma_sr": 0.01, "gamma_rs": 0.01,
                "gamma_rh": 0.01, "gamma_hr": 0.01},
    "schemes": ["MART", "ALLRS", "ALLHS"],
    "sim": {"n_slots": 1000000, "seed": 3},
}


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(BASE))
    return str(path)


def test_solve_prints_each_scheme(cfg, capsys):
    assert main(["solve", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "MART" in out and "ALLHS" in out and "P*=10.000000 mW" in out


def test_scheme_and_solver_overrides(cfg, capsys):
    assert main(["solve", "--config", cfg, "--scheme", "mare_rayleigh", "--delta", "1e-3", "--k", "2"]) == 0
    assert capsys.readouterr().out.startswith("MARE_RAYLEIGH")
    assert main(["solve", "--config", cfg, "--scheme", "nope"]) == 2


def test_baseline(cfg, capsys):
    assert main(["baseline", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "ALLRS" in out and "ALLHS" in out and "MART" not in out


def test_simulate(cfg, capsys):
    assert main(["simulate", "--config", cfg, "--power-mw", "6", "--rho", "0.5",
                 "--slots", "200000", "--seed", "4", "--warmup", "0.2"]) == 0
    out = capsys.readouterr().out
    assert "slots=200000 seed=4 warmup=0.2" in out and "ART sim=" in out
    assert main(["simulate", "--config", cfg, "--power-mw", "60", "--rho", "0.5"]) == 2


def test_sweep_to_file_and_stdout(cfg, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert out.read_text().startswith("sweep_variable,")
    assert main(["sweep", "--config", cfg, "--fix", "rho-sweep", "--rho-step", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "rho,power_mw,art_slots" and len(lines) == 1 + 4 * 3


def test_validate_exit_codes(tmp_path, capsys):
    good = dict(BASE, validate={"probes": [{"power_mw": 10, "rho": 1.0}]})
    p = tmp_path / "g.json"
    p.write_text(json.dumps(good))
    assert main(["validate", "--config", str(p)]) == 0
    # an impossible tolerance must fail
    assert main(["validate", "--config", str(p), "--tolerance", "1e-9"]) == 1
    assert "0/1 probes" in capsys.readouterr().out


def test_config_errors_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({k: v for k, v in BASE.items() if k != "qc_r"}))
    assert main(["solve", "--config", str(p)]) == 2
    assert "qc_r required" in capsys.readouterr().err
    assert main(["sweep", "--config", str(tmp_path / "none.json")]) == 2
