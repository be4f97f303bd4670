import json
import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dampedflow import Grid2D, FlowState2D
from dampedflow.cli import (
    ConfigError, config_hash, content_hash, main, read_snapshot,
    run_sweep, write_snapshot,
)


def write_cfg(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


BURGERS_CFG = {
    "mode": "burgers",
    "law": {"mu": "0.5", "lambda": "1"},
    "eps": 0.1, "M": 1.0, "profile": "bump", "t_end": 3.0, "nx": 256,
}


def test_burgers_mode_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, "b.json", BURGERS_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["burgers", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["burgers", "--config", cfg, "--out", str(out2)]) == 0
    for name in ("burgers_series.csv", "burgers_final.csv"):
        assert content_hash(out1 / name) == content_hash(out2 / name)
    man = json.loads((out1 / "manifest.json").read_text())
    assert man["config_hash"] == config_hash(BURGERS_CFG)
    assert len(man["files"]) == 2


def test_csv_header_block(tmp_path):
    cfg = write_cfg(tmp_path, "b.json", BURGERS_CFG)
    out = tmp_path / "o"
    main(["burgers", "--config", cfg, "--out", str(out)])
    lines = (out / "burgers_series.csv").read_text().splitlines()
    assert lines[0].startswith("# dampedflow ")
    assert lines[1].startswith("# config: ")
    header_idx = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
    assert lines[header_idx] == "t,sup_v,max_slope,lifespan_prediction"


def test_invalid_config_paths(tmp_path):
    bad = dict(BURGERS_CFG)
    del bad["eps"]
    cfg = write_cfg(tmp_path, "bad.json", bad)
    assert main(["burgers", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    bad2 = dict(BURGERS_CFG)
    bad2["law"] = {"mu": "-1", "lambda": "1"}
    cfg2 = write_cfg(tmp_path, "bad2.json", bad2)
    assert main(["burgers", "--config", cfg2, "--out", str(tmp_path / "y")]) == 2
    # mode mismatch
    cfg3 = write_cfg(tmp_path, "b3.json", BURGERS_CFG)
    assert main(["euler2d", "--config", cfg3, "--out", str(tmp_path / "z")]) == 2


def test_snapshot_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    grid = Grid2D(L=3.0, n=32)
    state = FlowState2D(rng.normal(size=(32, 32)), rng.normal(size=(32, 32)),
                        rng.normal(size=(32, 32)), 1.25, grid)
    p = tmp_path / "s.bin"
    write_snapshot(p, state)
    back = read_snapshot(p)
    assert back.t == state.t
    assert back.grid.L == grid.L and back.grid.n == grid.n
    assert np.array_equal(back.theta, state.theta)
    assert np.array_equal(back.u1, state.u1)
    assert np.array_equal(back.u2, state.u2)
    assert p.read_bytes()[:4] == b"DEL1"
    assert len(p.read_bytes()) == 4 + 4 + 8 + 8 + 3 * 32 * 32 * 8


def test_euler_and_diagnose_pipeline(tmp_path):
    cfg = {
        "mode": "euler2d",
        "law": {"mu": "1", "lambda": "0.5"},
        "gas": {"gamma": 2.0},
        "eps": 0.05, "M": 2.0, "t_end": 1.0,
        "grid": {"n": 96, "L": 6.0},
        "data_family": "outward_push", "amplitude": 2.0, "Lambda": 3.0,
        "sample_dt": 0.25, "snapshot_times": [0.0, 0.4, 0.8],
    }
    cpath = write_cfg(tmp_path, "e.json", cfg)
    out = tmp_path / "eo"
    assert main(["euler2d", "--config", cpath, "--out", str(out), "--verify"]) == 0
    snaps = sorted(str(p) for p in out.glob("snapshot_*.bin"))
    assert len(snaps) == 3
    dcfg = {
        "mode": "diagnose",
        "law": {"mu": "1", "lambda": "0.5"},
        "gas": {"gamma": 2.0},
        "eps": 0.05, "M": 2.0, "M0": 1.0,
        "snapshots": snaps,
    }
    dpath = write_cfg(tmp_path, "d.json", dcfg)
    dout = tmp_path / "do"
    assert main(["diagnose", "--config", dpath, "--out", str(dout)]) == 0
    text = (dout / "diagnostics.csv").read_text()
    assert "t,F,F_prime,F_second,P_min,P_max,xi" in text


def test_specfun_check_mode(tmp_path):
    cfg = {"mode": "specfun-check", "points": 3, "z_points": 4,
           "laws": [["1", "1"], ["1", "2"]]}
    cpath = write_cfg(tmp_path, "s.json", cfg)
    out = tmp_path / "so"
    assert main(["specfun-check", "--config", cpath, "--out", str(out)]) == 0
    body = [ln for ln in (out / "specfun_check.csv").read_text().splitlines()
            if not ln.startswith("#")]
    checks = {ln.split(",")[0] for ln in body[1:]}
    assert checks == {"adjoint-richardson", "derivative-identity", "delta0"}


def test_sweep_burgers_dichotomy(tmp_path):
    cfg = {
        "mode": "sweep", "cell_mode": "burgers",
        "lambdas": ["0.5", "1", "2"], "mus": ["0.5", "2"],
        "eps": [1e-3], "t_end": 5.0,
    }
    rows_files = run_sweep(cfg, tmp_path, threads=1)
    rows = rows_files[1]
    assert len(rows) == 6
    by_cell = {(r[0], r[1]): r for r in rows}
    # Case-1 column and the supercritical lam=1 cell are global
    assert by_cell[("0.5", "0.5")][4] == "global"
    assert by_cell[("0.5", "2")][4] == "global"
    assert by_cell[("1", "2")][4] == "global"
    assert by_cell[("1", "0.5")][4].startswith("blowup@")
    assert by_cell[("2", "0.5")][4].startswith("blowup@")
    assert by_cell[("2", "2")][4].startswith("blowup@")
    # case labels come from the classifier
    assert by_cell[("1", "0.5")][3] == "CASE3"
    assert by_cell[("2", "2")][3] == "CASE4"
    assert by_cell[("0.5", "2")][3] == "CASE1"


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = {
        "mode": "sweep", "cell_mode": "burgers",
        "lambdas": ["0.5", "1.5"], "mus": ["1"], "eps": [1e-2],
    }
    (tmp_path / "a").mkdir(exist_ok=True)
    (tmp_path / "b").mkdir(exist_ok=True)
    _, serial = run_sweep(cfg, tmp_path / "a", threads=1)
    _, par = run_sweep(cfg, tmp_path / "b", threads=2)
    assert serial == par


def test_sweep_guards(tmp_path):
    with pytest.raises(ConfigError):
        run_sweep({"mode": "sweep", "lambdas": [], "mus": ["1"]}, tmp_path)
    with pytest.raises(ConfigError):
        run_sweep({"mode": "sweep", "lambdas": ["1"] * 30, "mus": ["1"] * 10,
                   "budget": 64}, tmp_path)


def test_sweep_euler_cell_mode(tmp_path):
    # strong data at short horizon: the supercritical-decay cell reports a
    # finite blowup and the row carries the classifier's label
    cfg = {
        "mode": "sweep", "cell_mode": "euler2d",
        "lambdas": ["2"], "mus": ["1"], "eps": [0.3],
        "t_end": 0.6, "M": 1.0, "n": 96, "amplitude": 3.0, "Lambda": 3.0,
    }
    _, rows = run_sweep(cfg, tmp_path)
    assert len(rows) == 1
    lam, mu, eps, case, outcome, tb = rows[0]
    assert case == "CASE4"
    assert outcome.startswith("blowup@") and math.isfinite(tb)


def test_sweep_records_cell_failures(tmp_path):
    # an invalid per-cell parameter must not kill the sweep
    cfg = {
        "mode": "sweep", "cell_mode": "burgers", "profile": "nope",
        "lambdas": ["1"], "mus": ["1"], "eps": [0.01],
    }
    _, rows = run_sweep(cfg, tmp_path)
    assert len(rows) == 1
    assert rows[0][3] == "ERROR"
    assert rows[0][4].startswith("error:")


def test_euler_mode_determinism(tmp_path):
    cfg = {
        "mode": "euler2d",
        "law": {"mu": "1", "lambda": "0.5"},
        "gas": {"gamma": 2.0},
        "eps": 0.05, "M": 2.0, "t_end": 0.5,
        "grid": {"n": 64, "L": 4.0},
        "data_family": "rotational", "sample_dt": 0.25,
    }
    cpath = write_cfg(tmp_path, "e.json", cfg)
    h = []
    for sub in ("o1", "o2"):
        assert main(["euler2d", "--config", cpath, "--out",
                     str(tmp_path / sub)]) == 0
        h.append((content_hash(tmp_path / sub / "euler_series.csv"),
                  content_hash(tmp_path / sub / "euler_pfunctional.csv")))
    assert h[0] == h[1]
