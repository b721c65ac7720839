import json
import math

import numpy as np
import pytest

from latcirc.cli import run


def read_hash_and_body(path):
    text = path.read_text()
    first, _, rest = text.partition("\n")
    assert first.startswith("# config_hash=")
    return first[len("# config_hash=") :], rest


def test_dispersion_csv(tmp_path):
    out = tmp_path / "disp.csv"
    assert run(["dispersion", "--a", "0.1", "--m", "1", "--L", "256", "--out", str(out)]) == 0
    _, body = read_hash_and_body(out)
    lines = body.strip().split("\n")
    assert lines[0] == "p,theta,omega,E,E_latt"
    assert len(lines) == 257
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    # momenta inside the zone, sorted ascending
    assert rows[:, 0].min() > -math.pi / 0.1 and rows[:, 0].max() <= math.pi / 0.1 + 1e-12
    assert np.all(np.diff(rows[:, 0]) > 0)
    # Fig.-2 behavior straight from the emitted table
    half = rows[rows[:, 0] >= 0]
    rel_theta = np.abs(half[:, 1] - half[:, 3]) / half[:, 3]
    assert rel_theta.max() < 0.05


def test_movers_json(tmp_path):
    out = tmp_path / "movers.json"
    assert run(["movers", "--L", "8", "--out", str(out)]) == 0
    _, body = read_hash_and_body(out)
    payload = json.loads(body)
    assert payload["residual"] < 1e-12
    assert payload["params"]["m"] == 0.0


def test_lightcone_json(tmp_path):
    out = tmp_path / "cone.json"
    assert run(["lightcone", "--m", "0", "--tau", "3", "--L", "32", "--out", str(out)]) == 0
    payload = json.loads(read_hash_and_body(out)[1])
    assert payload["radius"] == 3


def test_propagator_csv(tmp_path):
    out = tmp_path / "prop.csv"
    assert run(["propagator", "--L", "8", "--out", str(out)]) == 0
    _, body = read_hash_and_body(out)
    lines = body.strip().split("\n")
    assert lines[0] == "p0,p1,re,im"
    assert len(lines) == 65


def test_oneloop_csv_normalization(tmp_path):
    out = tmp_path / "oneloop.csv"
    code = run(
        ["oneloop", "--lambda", "1", "--m", "1", "--a-series", "0.2,0.1,0.05,0.025",
         "--out", str(out)]
    )
    assert code == 0
    _, body = read_hash_and_body(out)
    lines = body.strip().split("\n")
    assert lines[0].split(",") == [
        "a", "pi_cont", "pi_shift_plain", "pi_shift_smeared",
        "pi_cont_norm", "pi_shift_plain_norm", "pi_shift_smeared_norm",
    ]
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    # normalized columns agree (= 0) at the largest lattice spacing
    largest = rows[np.argmax(rows[:, 0])]
    assert np.all(largest[4:] == 0.0)


def test_pathint_check_json(tmp_path):
    out = tmp_path / "pathint.json"
    assert run(["pathint-check", "--n-points", "16", "--tau", "2", "--out", str(out)]) == 0
    payload = json.loads(read_hash_and_body(out)[1])
    assert payload["rel_errors"]["path"] < 1e-12
    assert payload["rel_errors"]["action"] < 1e-10  # dual grid default


def test_gauge_check_json(tmp_path):
    out = tmp_path / "gauge.json"
    assert run(["gauge-check", "--tau", "1", "--pairs", "3", "--out", str(out)]) == 0
    payload = json.loads(read_hash_and_body(out)[1])
    assert payload["deviation"] < 1e-10
    assert payload["gauss_commutator_max"] < 1e-12
    assert 0.0 < payload["wel_unitarity_deviation"] < 1.0


def test_renorm_cli(tmp_path):
    from latcirc.kinematics import LatticeParams, dispersion_theta

    base = LatticeParams(a=0.1, m=1.0)
    targets = [dispersion_theta(base, p) for p in (0.3, 0.6, 0.9)]
    problem = {
        "a": 0.1,
        "m": 1.0,
        "observables": [{"kind": "dispersion_theta", "p": p} for p in (0.3, 0.6, 0.9)],
        "targets": targets,
        "init": {"m": 1.3},
        "eta": 0.05,
        "tol": 1e-8,
        "max_iters": 500,
    }
    problem_path = tmp_path / "problem.json"
    problem_path.write_text(json.dumps(problem))
    out = tmp_path / "renorm.json"
    assert run(["renorm", "--problem", str(problem_path), "--out", str(out)]) == 0
    payload = json.loads(read_hash_and_body(out)[1])
    assert payload["converged"] is True
    assert abs(payload["final"]["m"] - 1.0) < 1e-3


def test_config_file_and_flag_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"a": 0.2, "m": 2.0, "L": 8}))
    out1 = tmp_path / "a.csv"
    assert run(["dispersion", "--config", str(cfg_path), "--out", str(out1)]) == 0
    rows = out1.read_text().strip().split("\n")[2:]
    first_p = float(rows[0].split(",")[0])
    assert abs(first_p) < math.pi / 0.2 + 1e-12  # zone of a = 0.2
    # flags override the file
    out2 = tmp_path / "b.csv"
    assert run(["dispersion", "--config", str(cfg_path), "--a", "0.1", "--out", str(out2)]) == 0
    assert read_hash_and_body(out1)[0] != read_hash_and_body(out2)[0]
    # unknown config keys are a validation error
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(["dispersion", "--config", str(bad), "--out", str(tmp_path / "c.csv")]) == 1


def test_exit_codes(tmp_path):
    assert run(["nosuchcommand"]) == 1
    assert run(["dispersion"]) == 1  # missing --out
    # m = 0 makes the dispersion table degenerate at p = 0: validation error
    assert run(["dispersion", "--m", "0", "--out", str(tmp_path / "x.csv")]) == 1
    # resource cap: cone wrap-around
    assert run(["lightcone", "--tau", "5", "--L", "8", "--out", str(tmp_path / "y.json")]) == 3


def test_byte_identical_reruns(tmp_path):
    cases = [
        ["dispersion", "--a", "0.1", "--m", "1", "--L", "32"],
        ["movers", "--L", "4"],
        ["lightcone", "--tau", "2", "--L", "16"],
        ["propagator", "--L", "4"],
        ["oneloop", "--a-series", "0.2,0.1,0.05,0.02"],
        ["pathint-check", "--n-points", "12"],
        ["gauge-check", "--tau", "1", "--pairs", "2", "--seed", "7"],
    ]
    for idx, argv in enumerate(cases):
        first = tmp_path / f"run{idx}_a.out"
        second = tmp_path / f"run{idx}_b.out"
        assert run(argv + ["--out", str(first)]) == 0
        assert run(argv + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes(), argv[0]
