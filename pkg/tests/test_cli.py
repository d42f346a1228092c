import json

import numpy as np

from blocksysid.cli import main
from blocksysid.lti import load_model, save_batch_csv, simulate_batch


def run_cli(*args):
    return main([str(a) for a in args])


def test_gen_deterministic_files(tmp_path):
    out1, out2 = tmp_path / "m1.json", tmp_path / "m2.json"
    assert run_cli("gen", "--generator", "synthetic", "--n", 12, "--w", 2, "--seed", 7, "--out", out1) == 0
    assert run_cli("gen", "--generator", "synthetic", "--n", 12, "--w", 2, "--seed", 7, "--out", out2) == 0
    assert out1.read_bytes() == out2.read_bytes()
    model = load_model(str(out1))
    assert model.n == 12 and model.m == 12


def test_gen_other_generators(tmp_path):
    p = tmp_path / "spring.json"
    assert run_cli("gen", "--generator", "mass_spring", "--masses", 4, "--out", p) == 0
    assert load_model(str(p)).n == 8
    p2 = tmp_path / "agents.json"
    assert run_cli("gen", "--generator", "multi_agent", "--agents", 5, "--degree", 2,
                   "--state-size", 2, "--input-size", 2, "--seed", 3, "--out", p2) == 0
    assert load_model(str(p2)).partition.max_block_size == 4


def test_check_reports_positive_gamma(tmp_path, capsys):
    p = tmp_path / "m.json"
    run_cli("gen", "--generator", "synthetic", "--n", 10, "--w", 1, "--seed", 0, "--out", p)
    assert run_cli("check", "--model", p, "--T", 3) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["gamma"] > 0
    assert doc["satisfied"]["A1"] is True


def test_solve_lambda_zero_matches_least_squares(tmp_path):
    p = tmp_path / "m.json"
    run_cli("gen", "--generator", "synthetic", "--n", 6, "--w", 1, "--seed", 2, "--out", p)
    est = tmp_path / "est.json"
    ls = tmp_path / "ls.json"
    assert run_cli("solve", "--model", p, "--T", 3, "--d", 50, "--seed", 4,
                   "--lambda", 0, "--out", est) == 0
    assert run_cli("solve", "--model", p, "--T", 3, "--d", 50, "--seed", 4,
                   "--estimator", "least_squares", "--out", ls) == 0
    a = np.asarray(json.loads(est.read_text())["theta_hat"])
    b = np.asarray(json.loads(ls.read_text())["theta_hat"])
    assert np.abs(a - b).max() < 1e-6


def test_solve_from_batch_file(tmp_path):
    p = tmp_path / "m.json"
    run_cli("gen", "--generator", "synthetic", "--n", 6, "--w", 1, "--seed", 2, "--out", p)
    model = load_model(str(p))
    batch = simulate_batch(model, 3, 40, seed=9)
    bpath = tmp_path / "batch.csv"
    save_batch_csv(batch, str(bpath))
    out = tmp_path / "est.json"
    assert run_cli("solve", "--model", p, "--batch", bpath, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"theta_hat", "support_mask", "lambda_d", "kkt_residual"}
    assert np.asarray(doc["theta_hat"]).shape == (12, 6)


def test_solve_output_deterministic(tmp_path):
    p = tmp_path / "m.json"
    run_cli("gen", "--generator", "synthetic", "--n", 6, "--w", 1, "--seed", 1, "--out", p)
    o1, o2 = tmp_path / "a.json", tmp_path / "b.json"
    for o in (o1, o2):
        run_cli("solve", "--model", p, "--T", 3, "--d", 60, "--seed", 5, "--out", o)
    assert o1.read_bytes() == o2.read_bytes()


def test_sweep_deterministic_csv(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "generator": {"kind": "synthetic", "n": 8, "w": 1},
        "T_list": [3],
        "d_list": [20, 50],
        "seeds": [0, 1],
        "estimators": ["block_reg", "least_squares"],
    }))
    o1, o2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert run_cli("sweep", "--config", cfg, "--out", o1) == 0
    assert run_cli("sweep", "--config", cfg, "--out", o2, "--workers", 3) == 0
    assert o1.read_bytes() == o2.read_bytes()
    header = o1.read_text().splitlines()[0]
    assert header.startswith("generator,gen_params,n,m,T,d,seed,estimator,status,lambda_d")


def test_sweep_seed_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "generator": {"kind": "synthetic", "n": 8, "w": 1},
        "T_list": [3], "d_list": [20], "seeds": [0, 1, 2],
        "estimators": ["block_reg"],
    }))
    out = tmp_path / "r.csv"
    assert run_cli("sweep", "--config", cfg, "--out", out, "--seed", 5) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2  # header + one record
    assert ",5," in lines[1]


def test_cli_error_reporting(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert run_cli("check", "--model", missing, "--T", 3) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run_cli("check", "--model", bad, "--T", 3) == 2
