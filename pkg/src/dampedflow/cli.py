"""Experiment orchestration: configs, runs, sweeps, CSV/binary artifacts.

Configs are JSON; the damping parameters mu and lambda are decimal
strings so the lambda = 1 branch is selected exactly as written.  Every
CSV starts with a comment block carrying the package version and the
config hash; a `# generated:` timestamp line is excluded from content
hashing so reruns are byte-comparable.  Field snapshots use the flat
binary layout: magic b"DEL1", u32 n, f64 L, f64 t, then row-major
float64 theta, u1, u2 (little-endian).  Formats are documented in
docs/formats.md.
"""

import argparse
import hashlib
import json
import math
import struct
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import DampingLaw, GasLaw, classify_case, xi
from .euler2d import (
    FlowState2D, Grid2D, data_family, init_state, run_euler2d,
    DEFAULT_SIGMA, DEFAULT_CFL,
)
from .burgers1d import PROFILE_FAMILIES, grid_solve, lifespan
from .diagnostics import f_functional, monitor_ode_inequalities, p_functional, q0, q1
from .testbench import make_catalog, random_bump_field, testbench_divcurl, \
    testbench_klainerman, testbench_weighted
from .specfun import CharPoint, HyperParams, adjoint_residual, delta0_search, \
    psi, psi_raised

SNAPSHOT_MAGIC = b"DEL1"


# ---------------------------------------------------------------------------
# config handling

class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"config field '{path}': {message}")


def _req(cfg, key, path=""):
    if key not in cfg:
        raise ConfigError(f"{path}{key}", "missing")
    return cfg[key]


def parse_law(cfg):
    raw = _req(cfg, "law")
    mu = float(_req(raw, "mu", "law."))
    lam = float(_req(raw, "lambda", "law."))
    try:
        return DampingLaw(mu=mu, lam=lam)
    except ValueError as e:
        raise ConfigError("law", str(e))


def parse_gas(cfg):
    raw = cfg.get("gas", {})
    return GasLaw(gamma=float(raw.get("gamma", 2.0)),
                  rho_bar=float(raw.get("rho_bar", 1.0)))


def config_hash(cfg):
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config(path):
    with open(path) as f:
        cfg = json.load(f)
    if "mode" not in cfg:
        raise ConfigError("mode", "missing")
    return cfg


# ---------------------------------------------------------------------------
# artifact IO

def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path, columns, rows, cfg_hash, extra_meta=()):
    lines = [f"# dampedflow {__version__}", f"# config: {cfg_hash}"]
    lines += [f"# {k}: {v}" for k, v in extra_meta]
    lines.append(f"# generated: {datetime.now(timezone.utc).isoformat()}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def content_hash(path):
    """sha256 of the file with '# generated:' lines removed."""
    keep = [ln for ln in Path(path).read_bytes().split(b"\n")
            if not ln.startswith(b"# generated:")]
    return hashlib.sha256(b"\n".join(keep)).hexdigest()


def write_snapshot(path, state):
    n = state.grid.n
    with open(path, "wb") as f:
        f.write(SNAPSHOT_MAGIC)
        f.write(struct.pack("<I", n))
        f.write(struct.pack("<d", state.grid.L))
        f.write(struct.pack("<d", state.t))
        for field in (state.theta, state.u1, state.u2):
            f.write(np.ascontiguousarray(field, dtype="<f8").tobytes())


def read_snapshot(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        n = struct.unpack("<I", f.read(4))[0]
        L = struct.unpack("<d", f.read(8))[0]
        t = struct.unpack("<d", f.read(8))[0]
        data = np.frombuffer(f.read(3 * n * n * 8), dtype="<f8")
    theta, u1, u2 = (data[i * n * n:(i + 1) * n * n].reshape(n, n).copy()
                     for i in range(3))
    return FlowState2D(theta=theta, u1=u1, u2=u2, t=t, grid=Grid2D(L=L, n=n))


def write_manifest(outdir, cfg, files):
    manifest = {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "files": [
            {"path": str(Path(p).name), "sha256": content_hash(p),
             "bytes": Path(p).stat().st_size}
            for p in sorted(files)
        ],
    }
    path = Path(outdir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# burgers mode

def run_burgers(cfg, outdir):
    law = parse_law(cfg)
    eps = float(_req(cfg, "eps"))
    profile_id = cfg.get("profile", "bump")
    if profile_id not in PROFILE_FAMILIES:
        raise ConfigError("profile", f"unknown id {profile_id!r}")
    profile = PROFILE_FAMILIES[profile_id](M=float(cfg.get("M", 1.0)))
    t_end = float(_req(cfg, "t_end"))
    nx = int(cfg.get("nx", 4096))
    T = lifespan(profile, eps, law)
    sol = grid_solve(profile, eps, law, t_end, nx)
    h = config_hash(cfg)
    files = []
    series = Path(outdir) / "burgers_series.csv"
    rows = [
        (t, sv, sl, T if math.isfinite(T) else math.inf)
        for t, sv, sl in zip(sol.times, sol.sup_v, sol.max_slope)
    ]
    write_csv(series, ["t", "sup_v", "max_slope", "lifespan_prediction"], rows, h,
              extra_meta=[("detected_blowup", sol.detected_blowup_time)])
    files.append(series)
    final = Path(outdir) / "burgers_final.csv"
    write_csv(final, ["x", "v"], list(zip(sol.x, sol.snapshots[-1][1])), h)
    files.append(final)
    return files, {"lifespan": T, "detected": sol.detected_blowup_time}


# ---------------------------------------------------------------------------
# euler2d mode

def build_euler_setup(cfg):
    law = parse_law(cfg)
    gas = parse_gas(cfg)
    eps = float(_req(cfg, "eps"))
    M = float(cfg.get("M", 1.0))
    t_end = float(_req(cfg, "t_end"))
    gcfg = cfg.get("grid", {})
    n = int(gcfg.get("n", 256))
    L = float(gcfg.get("L", t_end + M + 1.0))
    grid = Grid2D(L=L, n=n)
    rho0, u0 = data_family(
        cfg.get("data_family", "rotational"), grid, M,
        amplitude=float(cfg.get("amplitude", 1.0)),
        Lambda=float(cfg.get("Lambda", 0.0)),
        rho_bar=gas.rho_bar,
    )
    state = init_state(gas, eps, rho0, u0, grid)
    return law, gas, eps, M, t_end, grid, state


def run_euler(cfg, outdir):
    law, gas, eps, M, t_end, grid, state = build_euler_setup(cfg)
    sigma = float(cfg.get("sigma", DEFAULT_SIGMA))
    n_l = int(cfg.get("l_points", 97))
    M0 = float(cfg.get("M0", M / 2.0))
    lbar = np.linspace(M0, M, n_l)
    sample_dt = float(cfg.get("sample_dt", max(t_end / 200.0, 1e-3)))
    snapshot_times = sorted(float(t) for t in cfg.get("snapshot_times", []))
    snaps_left = list(snapshot_times)
    files = []
    h = config_hash(cfg)

    def sampler(s):
        if snaps_left and s.t >= snaps_left[0]:
            path = Path(outdir) / f"snapshot_{s.t:09.4f}.bin"
            write_snapshot(path, s)
            files.append(path)
            while snaps_left and s.t >= snaps_left[0]:
                snaps_left.pop(0)   # overdue targets collapse to this state
        return p_functional(s, s.t + lbar, gas)

    res = run_euler2d(law, gas, state, t_end, sigma=sigma, M=M,
                      sample_dt=sample_dt, sample_fn=sampler,
                      record_dt=float(cfg.get("record_dt", 0.25)))
    series = Path(outdir) / "euler_series.csv"
    rows = [
        (t, st, su, w, xi(law, t), m,
         1 if (res.blowup and t >= res.blowup.t) else 0)
        for t, st, su, w, m in zip(res.times, res.sup_theta, res.sup_u,
                                   res.w_norm, res.mass)
    ]
    meta = [("sigma", sigma), ("cfl", DEFAULT_CFL), ("M", M), ("M0", M0)]
    if res.blowup:
        meta += [("blowup_t", res.blowup.t), ("blowup_signal", res.blowup.signal)]
    write_csv(series, ["t", "sup_theta", "sup_u", "w_norm", "xi", "mass", "blowup"],
              rows, h, extra_meta=meta)
    files.append(series)

    pfile = Path(outdir) / "euler_pfunctional.csv"
    p_rows = [(t,) + tuple(P) for t, P in res.samples]
    write_csv(pfile, ["t"] + [f"P_l{i}" for i in range(n_l)], p_rows, h,
              extra_meta=[("lbar_min", M0), ("lbar_max", M)])
    files.append(pfile)
    return files, res


# ---------------------------------------------------------------------------
# diagnose mode (consumes snapshots)

def run_diagnose(cfg, outdir):
    law = parse_law(cfg)
    gas = parse_gas(cfg)
    eps = float(cfg.get("eps", 1.0))
    M = float(cfg.get("M", 1.0))
    M0 = float(cfg.get("M0", M / 2.0))
    paths = sorted(cfg.get("snapshots", []))
    if not paths:
        raise ConfigError("snapshots", "no snapshot files given")
    states = [read_snapshot(p) for p in paths]
    lbar = np.linspace(M0, M, int(cfg.get("l_points", 97)))
    times = np.array([s.t for s in states])
    P = np.array([p_functional(s, s.t + lbar, gas) for s in states])
    F0, F1, F2 = f_functional(times, P, lbar, M0, M)
    case = classify_case(law, 2)
    rep = monitor_ode_inequalities(times, F0, F2, eps, M, case,
                                   gamma=gas.gamma)
    h = config_hash(cfg)
    out = Path(outdir) / "diagnostics.csv"
    rows = [
        (times[i], F0[i], F1[i], F2[i],
         float(np.min(P[i])), float(np.max(P[i])), xi(law, times[i]))
        for i in range(len(times))
    ]
    meta = [("case", case.name), ("monitor_asserted", rep.asserted)]
    if rep.asserted:
        meta += [("inf_ratio1", rep.inf_ratio1), ("inf_ratio2", rep.inf_ratio2)]
    write_csv(out, ["t", "F", "F_prime", "F_second", "P_min", "P_max", "xi"],
              rows, h, extra_meta=meta)
    return [out], rep


# ---------------------------------------------------------------------------
# testbench mode

def run_testbench(cfg, outdir):
    M = float(cfg.get("M", 1.0))
    times = [float(t) for t in cfg.get("times", [0.0, 5.0, 20.0])]
    n = int(cfg.get("grid", {}).get("n", 192))
    rows = []
    catalog = make_catalog(M)
    for fn in catalog:
        for t in times:
            lhs, rhs, C = testbench_klainerman(fn, t, M=M, n=n)
            rows.append(("klainerman", fn.name, t, lhs, rhs, C))
            lhs, rhs, C = testbench_weighted(fn, t, nu=0.5, M=M, n=n)
            rows.append(("weighted-pointwise", fn.name, t, lhs, rhs, C))
            lhs, rhs, C = testbench_weighted(fn, t, ell=0.0, M=M, n=n)
            rows.append(("weighted-l2", fn.name, t, lhs, rhs, C))
    grid = Grid2D(L=2.0, n=n)
    for seed in range(int(cfg.get("divcurl_fields", 10))):
        u1, u2 = random_bump_field(grid, 1.5, seed=seed)
        lhs, rhs = testbench_divcurl(u1, u2, grid)
        rows.append(("divcurl", f"seed{seed}", 0.0, lhs, rhs,
                     lhs / rhs if rhs else math.inf))
    out = Path(outdir) / "testbench.csv"
    write_csv(out, ["bench", "function", "t", "lhs", "rhs", "C"], rows,
              config_hash(cfg))
    return [out], rows


# ---------------------------------------------------------------------------
# specfun-check mode

def run_specfun_check(cfg, outdir):
    rows = []
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    laws = [DampingLaw(float(m), float(l))
            for m, l in cfg.get("laws", [("1", "1"), ("1", "1.5"), ("1", "2")])]
    pA = CharPoint(2.0, 6.0)
    for law in laws:
        for _ in range(int(cfg.get("points", 10))):
            p = CharPoint(rng.uniform(0.8, 1.8), rng.uniform(3.0, 5.5))
            r1 = adjoint_residual(p, pA, law, 1e-2)
            r2 = adjoint_residual(p, pA, law, 5e-3)
            rows.append(("adjoint-richardson", law.mu, law.lam, p.xi, p.zeta,
                         r1, r2, r1 / r2 if r2 else math.inf))
        params = HyperParams.from_law(law)
        for z in np.linspace(-0.45, -0.01, int(cfg.get("z_points", 12))):
            hh = 1e-5
            fd = (psi(params, z + hh) - psi(params, z - hh)) / (2 * hh)
            an = params.prod_ab / params.c * psi_raised(params, z)
            rows.append(("derivative-identity", law.mu, law.lam, z, math.nan,
                         fd, an, abs(fd - an) / abs(an)))
        d0 = delta0_search(law)
        rows.append(("delta0", law.mu, law.lam, math.nan, math.nan, d0, math.nan,
                     math.nan))
    out = Path(outdir) / "specfun_check.csv"
    write_csv(out, ["check", "mu", "lambda", "a1", "a2", "v1", "v2", "ratio"],
              rows, config_hash(cfg))
    return [out], rows


# ---------------------------------------------------------------------------
# sweep mode

def _sweep_cell(args):
    mu_s, lam_s, eps, cell_cfg = args
    try:
        return _sweep_cell_inner(mu_s, lam_s, eps, cell_cfg)
    except Exception as e:  # cell failures are per-row, the sweep continues
        return (lam_s, mu_s, eps, "ERROR", f"error:{type(e).__name__}: {e}",
                math.nan)


def _sweep_cell_inner(mu_s, lam_s, eps, cell_cfg):
    law = DampingLaw(float(mu_s), float(lam_s))
    case = classify_case(law, 2)
    mode = cell_cfg.get("cell_mode", "burgers")
    t_end = float(cell_cfg.get("t_end", 40.0))
    if mode == "burgers":
        profile = PROFILE_FAMILIES[cell_cfg.get("profile", "bump")](
            M=float(cell_cfg.get("M", 1.0)))
        T = lifespan(profile, eps, law)
        outcome = "global" if math.isinf(T) else f"blowup@{T:.6g}"
        tb = math.inf if math.isinf(T) else T
    else:
        gas = GasLaw(gamma=float(cell_cfg.get("gamma", 2.0)))
        M = float(cell_cfg.get("M", 1.0))
        n = int(cell_cfg.get("n", 128))
        grid = Grid2D(L=t_end + M + 1.0, n=n)
        rho0, u0 = data_family(cell_cfg.get("data_family", "outward_push"), grid, M,
                               amplitude=float(cell_cfg.get("amplitude", 3.0)),
                               Lambda=float(cell_cfg.get("Lambda", 3.0)))
        state = init_state(gas, eps, rho0, u0, grid)
        res = run_euler2d(law, gas, state, t_end,
                          sigma=float(cell_cfg.get("sigma", DEFAULT_SIGMA)), M=M)
        if res.blowup:
            outcome, tb = f"blowup@{res.blowup.t:.6g}", res.blowup.t
        else:
            outcome, tb = "global-to-t_end", math.inf
    return (lam_s, mu_s, eps, case.name, outcome, tb)


def run_sweep(cfg, outdir, threads=1):
    lambdas = [str(v) for v in _req(cfg, "lambdas")]
    mus = [str(v) for v in _req(cfg, "mus")]
    epss = [float(v) for v in cfg.get("eps", [1e-3])]
    cells = [(m, l, e, cfg) for l in lambdas for m in mus for e in epss]
    budget = int(cfg.get("budget", 256))
    if not cells:
        raise ConfigError("lambdas/mus", "empty sweep")
    if len(cells) > budget:
        raise ConfigError("budget", f"{len(cells)} cells exceed budget {budget}")
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    out = Path(outdir) / "phase_diagram.csv"
    write_csv(out, ["lambda", "mu", "eps", "case", "outcome", "t_blowup"],
              rows, config_hash(cfg))
    return [out], rows


# ---------------------------------------------------------------------------
# verification pass

def verify_outputs(outdir):
    """Post-hoc invariant suite over a result directory's manifest."""
    mpath = Path(outdir) / "manifest.json"
    if not mpath.exists():
        return ["manifest.json missing"]
    manifest = json.loads(mpath.read_text())
    problems = []
    for entry in manifest["files"]:
        p = Path(outdir) / entry["path"]
        if not p.exists():
            problems.append(f"{entry['path']}: listed but missing")
            continue
        if content_hash(p) != entry["sha256"]:
            problems.append(f"{entry['path']}: content hash mismatch")
        if p.suffix == ".csv":
            lines = p.read_text().splitlines()
            body = [ln for ln in lines if not ln.startswith("#")]
            if not body:
                problems.append(f"{entry['path']}: no header row")
                continue
            width = len(body[0].split(","))
            for ln in body[1:]:
                if len(ln.split(",")) != width:
                    problems.append(f"{entry['path']}: ragged row")
                    break
    return problems


# ---------------------------------------------------------------------------
# entry point

MODES = {
    "burgers": run_burgers,
    "euler2d": run_euler,
    "diagnose": run_diagnose,
    "testbench": run_testbench,
    "specfun-check": run_specfun_check,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="dampedflow",
        description="Experiments for compressible flow with time-decaying friction",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(MODES) + ["sweep"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--verify", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (OSError, json.JSONDecodeError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if cfg["mode"] != args.command:
        print(f"error: config mode {cfg['mode']!r} != subcommand {args.command!r}",
              file=sys.stderr)
        return 2
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "sweep":
            files, _ = run_sweep(cfg, outdir, threads=args.threads)
        else:
            files, _ = MODES[args.command](cfg, outdir)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 1
    write_manifest(outdir, cfg, files)
    if args.verify:
        problems = verify_outputs(outdir)
        if problems:
            for p in problems:
                print(f"verify: {p}", file=sys.stderr)
            return 1
        print("verify: ok")
    print(f"wrote {len(files)} artifact(s) to {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
