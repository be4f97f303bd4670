"""Acceptance suite: one test per exit criterion, at its stated tolerance.

Each test prints a single PASS line (pytest -s shows them; failures carry
the numbers).  Heavy solver runs are shared through module-scoped
fixtures so the suite stays minutes-scale.
"""

import math
import time

import mpmath as mp
import numpy as np
import pytest

from dampedflow import (
    CaseLabel, CharPoint, DampingLaw, GasLaw, Grid2D, HyperParams,
    adjoint_residual, adjoint_rhs_bracket, bump_profile, classify_case,
    data_family, delta0_search, evolve_fan, f_functional, fan_on_grid,
    grid_solve, init_state, lifespan, monitor_ode_inequalities, psi,
    psi_raised, psi_shifted, q0, run_euler2d, vorticity_residual,
    wave_residual, xi,
)
from dampedflow import testbench as tb
from dampedflow.diagnostics import p_functional
from dampedflow.euler2d import step as euler_step

mp.mp.dps = 50
GAS2 = GasLaw(gamma=2.0)


def report(num, text):
    line = f"ACCEPTANCE {num}: PASS - {text}"
    print("\n" + line)
    try:
        from conftest import acceptance_lines
        acceptance_lines.append(line)
    except ImportError:
        pass


# ---------------------------------------------------------------------------
# 1. Burgers dichotomy

def test_criterion_1_burgers_dichotomy():
    t0 = time.time()
    prof = bump_profile()
    eps = 1e-3
    for lam in (0.0, 0.5, 0.9, 1.0, 1.1, 2.0):
        for mu in (0.5, 1.0, 2.0):
            T = lifespan(prof, eps, DampingLaw(mu, lam))
            expect_global = (0.0 <= lam < 1.0) or (lam == 1.0 and mu > 1.0)
            assert (T == math.inf) == expect_global, (lam, mu, T)
    elapsed = time.time() - t0
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s exceeds 1s"
    report(1, f"18-cell dichotomy exact, runtime {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 2. Burgers exact vs grid

def test_criterion_2_burgers_exact_vs_grid():
    t0 = time.time()
    law = DampingLaw(0.5, 1.0)
    prof = bump_profile()
    T = lifespan(prof, 0.1, law)
    assert abs(T - 35.0) < 1e-6
    sol = grid_solve(prof, 0.1, law, 45.0, nx=4096)
    assert sol.detected_blowup_time is not None
    rel = abs(sol.detected_blowup_time - 35.0) / 35.0
    assert rel < 0.05, f"detected {sol.detected_blowup_time}"
    sol30 = grid_solve(prof, 0.1, law, 30.0, nx=4096)
    vex = fan_on_grid(prof, 0.1, law, sol30.times[-1], sol30.x)
    sup_err = float(np.abs(sol30.snapshots[-1][1] - vex).max())
    assert sup_err < 2e-3, f"sup error {sup_err}"
    elapsed = time.time() - t0
    assert elapsed < 30.0
    report(2, f"T detected at {sol.detected_blowup_time:.2f} "
              f"({100*rel:.1f}% of exact), sup err {sup_err:.2e}, "
              f"runtime {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 3. Psi machinery

def _psi_oracle(prod_ab, c, z):
    disc = mp.sqrt(mp.mpf(1) - 4 * mp.mpf(prod_ab))
    a = (1 + disc) / 2
    b = (1 - disc) / 2
    return float(complex(mp.hyp2f1(a, b, c, mp.mpf(z))).real)


def test_criterion_3_psi_machinery():
    t0 = time.time()
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        law = DampingLaw(rng.uniform(0.2, 2.5), rng.uniform(1.0, 2.5))
        hp = HyperParams.from_law(law)
        z = rng.uniform(-0.5, 0.0)
        mine = psi(hp, z)
        ref = _psi_oracle(hp.prod_ab, 1, z)
        worst = max(worst, abs(mine - ref) / abs(ref))
    assert worst < 1e-12, f"worst psi error {worst}"
    h = 1e-5
    for _ in range(20):
        law = DampingLaw(rng.uniform(0.2, 2.5), rng.uniform(1.0, 2.5))
        hp = HyperParams.from_law(law)
        z = rng.uniform(-0.4, -0.01)
        fd = (psi(hp, z + h) - psi(hp, z - h)) / (2 * h)
        an = hp.prod_ab / hp.c * psi_raised(hp, z)
        assert abs(fd - an) / abs(an) < 1e-6
    for law in (DampingLaw(1, 1), DampingLaw(1, 2), DampingLaw(0.7, 1.5)):
        d0 = delta0_search(law)
        hp = HyperParams.from_law(law)
        zs = np.linspace(-d0 / 2, 0.0, 2560)
        p1, p2 = psi(hp, zs), psi_shifted(hp, zs)
        assert np.all((p1 >= 0.5) & (p1 <= 1.5) & (p2 >= 0.5) & (p2 <= 1.5))
    elapsed = time.time() - t0
    assert elapsed < 5.0
    report(3, f"100-sample oracle match (worst {worst:.2e}), derivative "
              f"identity, delta0 bound at 10x resolution; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 4. Riemann adjoint identity

def test_criterion_4_riemann_adjoint():
    t0 = time.time()
    rng = np.random.default_rng(7)
    pA = CharPoint(2.0, 6.0)
    for lam in (1.0, 1.5, 2.0):
        law = DampingLaw(1.0, lam)
        for _ in range(20):
            p = CharPoint(rng.uniform(0.8, 1.8), rng.uniform(3.0, 5.5))
            r1 = adjoint_residual(p, pA, law, 1e-2)
            r2 = adjoint_residual(p, pA, law, 5e-3)
            assert 3.5 <= r1 / r2 <= 4.5, (lam, p, r1 / r2)
    for mu in (0.25, 0.8, 1.0, 1.6):
        assert adjoint_rhs_bracket(DampingLaw(mu, 1.0), 4.2) == 0.0
    elapsed = time.time() - t0
    assert elapsed < 5.0
    report(4, f"second-order Richardson at 60 points, lam=1 bracket "
              f"exactly zero; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 5. Euler Case 1 long run

@pytest.fixture(scope="module")
def case1_run():
    law = DampingLaw(1.0, 0.5)
    M = 8.0
    grid = Grid2D(L=50.0, n=256)
    rho0, u0 = data_family("rotational", grid, M)
    state = init_state(GAS2, 0.05, rho0, u0, grid)
    t0 = time.time()
    res = run_euler2d(law, GAS2, state, t_end=40.0, M=M, record_dt=0.5)
    res.elapsed = time.time() - t0
    res.law = law
    res.sup0 = (float(np.abs(init_state(GAS2, 0.05, rho0, u0, grid).theta).max()),
                float(np.sqrt(u0[0] ** 2 + u0[1] ** 2).max() * 0.05))
    return res


def test_criterion_5_euler_case1(case1_run):
    res = case1_run
    assert res.blowup is None
    sup_th0, sup_u0 = res.sup0
    assert res.sup_theta.max() <= 2.0 * sup_th0
    assert res.sup_u.max() <= 2.0 * sup_u0
    # ||w|| * Xi^(1/3) non-increasing on [5, 40] within 5% jitter
    sel = res.times >= 5.0
    q = res.w_norm[sel] * np.array([xi(res.law, t) for t in res.times[sel]]) ** (1 / 3)
    running_min = np.minimum.accumulate(q)
    assert np.all(q <= 1.05 * np.maximum(running_min, 1e-300))
    # decay at least as fast as Xi^(-1/3) between t=5 and t=30 (20% slope)
    i5 = int(np.argmin(np.abs(res.times - 5.0)))
    i30 = int(np.argmin(np.abs(res.times - 30.0)))
    slope = (math.log(res.w_norm[i30]) - math.log(res.w_norm[i5])) / (
        math.log(xi(res.law, res.times[i30])) - math.log(xi(res.law, res.times[i5])))
    assert slope <= -(1 / 3) * 0.8, f"decay slope {slope}"
    drift = np.abs(res.mass - res.mass[0]).max() / abs(res.mass[0])
    assert drift < 1e-3, f"mass drift {drift}"
    assert res.elapsed < 600.0
    report(5, f"no blowup, sup bounded, w*Xi^(1/3) monotone (slope {slope:.2f}), "
              f"mass drift {drift:.1e}; {res.elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 6. Euler Case 4 blowup with functional checks

CASE4 = dict(law=DampingLaw(1.0, 2.0), M=1.0, M0=0.5, Lambda=3.0,
             amplitude=3.0, eps=0.3, t_end=1.0)


def _case4_run(n, threshold=1e3):
    law = CASE4["law"]
    M, M0 = CASE4["M"], CASE4["M0"]
    grid = Grid2D(L=CASE4["t_end"] * 1.4 + M + 0.4, n=n)
    rho0, u0 = data_family("outward_push", grid, M, amplitude=CASE4["amplitude"],
                           Lambda=CASE4["Lambda"])
    state = init_state(GAS2, CASE4["eps"], rho0, u0, grid)
    lbar = np.linspace(M0, M, 97)
    res = run_euler2d(
        law, GAS2, state, CASE4["t_end"], M=M, sample_dt=0.01,
        sample_fn=lambda s: p_functional(s, s.t + lbar, GAS2),
        threshold=threshold, record_dt=0.05,
    )
    return res, lbar


@pytest.fixture(scope="module")
def case4_runs():
    t0 = time.time()
    res256, lbar = _case4_run(256)
    res384, _ = _case4_run(384)
    res_lo, _ = _case4_run(256, threshold=1e2)
    res_hi, _ = _case4_run(256, threshold=1e4)
    elapsed = time.time() - t0
    return dict(r256=res256, r384=res384, rlo=res_lo, rhi=res_hi,
                lbar=lbar, elapsed=elapsed)


def test_criterion_6_blowup_detected(case4_runs):
    res = case4_runs["r256"]
    assert res.blowup is not None and math.isfinite(res.blowup.t)
    tb_lo = case4_runs["rlo"].blowup.t
    tb_hi = case4_runs["rhi"].blowup.t
    shift = abs(tb_lo - tb_hi) / res.blowup.t
    assert shift < 0.10, f"threshold sensitivity {shift}"
    report("6a", f"blowup at t={res.blowup.t:.3f} ({res.blowup.signal}); "
                 f"threshold 1e2 vs 1e4 shift {100*shift:.1f}%")


def _p_bound_worst_margin(res):
    law = CASE4["law"]
    t_cut = 0.9 * res.blowup.t
    q0v = res.samples[0][1]
    scale = float(np.abs(q0v).max())
    worst = math.inf
    count = 0
    for t, P in res.samples:
        if t > t_cut:
            continue
        count += 1
        margin = float((P - 0.25 * xi(law, t) ** -0.5 * q0v).min())
        worst = min(worst, margin / scale)
    return worst, count


def test_criterion_6_p_lower_bound(case4_runs):
    # The inequality is exact-arithmetic; on a grid the solution carries
    # O(h^2) error near the support edge, so the margin is allowed a
    # small negative floor that must shrink under refinement.
    worst256, count = _p_bound_worst_margin(case4_runs["r256"])
    worst384, _ = _p_bound_worst_margin(case4_runs["r384"])
    assert worst256 >= -1e-4, f"P bound violated beyond tolerance: {worst256}"
    assert worst384 >= -2e-5, f"P bound margin not shrinking: {worst384}"
    assert worst384 >= worst256
    report("6b", f"P(t, t+l) >= (1/4) Xi^(-1/2) q0(l) at all {count} samples "
                 f"(worst margin {worst256:.1e} at n=256, {worst384:.1e} at "
                 f"n=384, discretization floor)")


def _monitor_inf(res, lbar, t_lo, t_hi):
    times = np.array([t for t, _ in res.samples])
    P = np.array([p for _, p in res.samples])
    keep = times <= t_hi / 0.9 + 1e-12
    F0, F1, F2 = f_functional(times[keep], P[keep], lbar, CASE4["M0"], CASE4["M"])
    rep = monitor_ode_inequalities(
        times[keep], F0, F2, CASE4["eps"], CASE4["M"],
        classify_case(CASE4["law"], 2), t_hi=t_hi, t_lo=t_lo)
    assert rep.asserted
    return rep


def test_criterion_6_ode_ratio_infima(case4_runs):
    res256, res384 = case4_runs["r256"], case4_runs["r384"]
    tb_min = min(res256.blowup.t, res384.blowup.t)
    t_hi = 0.9 * tb_min
    t_lo = 0.45 * t_hi
    rep256 = _monitor_inf(res256, case4_runs["lbar"], t_lo, t_hi)
    rep384 = _monitor_inf(res384, case4_runs["lbar"], t_lo, t_hi)
    for name in ("inf_ratio1", "inf_ratio2"):
        a, b = getattr(rep256, name), getattr(rep384, name)
        assert a > 0 and b > 0
        assert abs(a - b) / a < 0.10, f"{name}: {a} vs {b}"
    report("6c", f"ratio infima positive and grid-stable: "
                 f"r1 {rep256.inf_ratio1:.3g}/{rep384.inf_ratio1:.3g}, "
                 f"r2 {rep256.inf_ratio2:.3g}/{rep384.inf_ratio2:.3g}; "
                 f"case-4 runs took {case4_runs['elapsed']:.0f}s")


# ---------------------------------------------------------------------------
# 7. Irrotational preservation (Case 2)

def test_criterion_7_irrotational_preservation():
    t0 = time.time()
    law = DampingLaw(2.0, 1.0)
    M = 8.0
    grid = Grid2D(L=50.0, n=256)
    rho0, u0 = data_family("irrotational", grid, M)
    state = init_state(GAS2, 0.05, rho0, u0, grid)
    res = run_euler2d(law, GAS2, state, t_end=40.0, M=M, record_dt=0.5)
    assert res.blowup is None
    floor = res.w_norm[0]
    ratio = res.w_norm.max() / floor
    assert ratio <= 10.0, f"vorticity grew {ratio}x over the discrete floor"
    report(7, f"curl-free data keeps ||w|| <= {ratio:.2f}x the t=0 floor "
              f"through t=40; {time.time()-t0:.0f}s")


# ---------------------------------------------------------------------------
# 8. Residual convergence and mutation guard

def _residual_history(n, dt, steps, eps=0.3):
    law = DampingLaw(1.0, 0.5)
    grid = Grid2D(L=6.0, n=n)
    rho0, u0 = data_family("rotational", grid, M=2.0)
    s = init_state(GAS2, eps, rho0, u0, grid)
    hist = [s.copy()]
    for _ in range(steps):
        s = euler_step(s, law, GAS2, dt)
        hist.append(s.copy())
    return hist, grid.h, law


def test_criterion_8_residual_convergence_and_mutation():
    t0 = time.time()
    law = DampingLaw(1.0, 0.5)
    norms = {}
    hists = {}
    for n, dt, steps in ((192, 4e-3, 8), (384, 2e-3, 16), (768, 1e-3, 32)):
        hist, h, law = _residual_history(n, dt, steps)
        hists[n] = (hist, h)
        l2 = lambda f: float(np.sqrt((f ** 2).sum()) * h)
        norms[n] = (l2(wave_residual(hist, law, GAS2)),
                    l2(vorticity_residual(hist, law)))
    wave_order = math.log2(norms[192][0] / norms[384][0])
    vort_order = math.log2(norms[192][1] / norms[384][1])
    assert wave_order >= 1.8, f"wave residual order {wave_order}"
    assert vort_order >= 1.8, f"vorticity residual order {vort_order}"
    # mutation guard on the finer pair: each flipped term stalls convergence
    hist4, h4 = hists[384]
    hist8, h8 = hists[768]
    base_ratio = norms[384][0] / norms[768][0]
    assert base_ratio >= 3.4
    for k in range(8):
        m4 = float(np.sqrt((wave_residual(hist4, law, GAS2, mutate=k) ** 2).sum()) * h4)
        m8 = float(np.sqrt((wave_residual(hist8, law, GAS2, mutate=k) ** 2).sum()) * h8)
        assert m4 / m8 < 2.3, f"mutated term {k} still converges ({m4/m8:.2f})"
    elapsed = time.time() - t0
    report(8, f"wave/vorticity residual orders {wave_order:.2f}/{vort_order:.2f}; "
              f"all 8 mutations stall convergence; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 9. Inequality test-bench

def test_criterion_9_testbench():
    t0 = time.time()
    catalog = tb.make_catalog(1.0)
    times = (0.0, 5.0, 20.0)
    spread = lambda vals: (max(vals) - min(vals)) / np.mean(vals)
    for fn in catalog:
        # every bench must give a positive finite constant on every member
        ck, cn, cl = [], [], []
        for t in times:
            _, _, C = tb.testbench_klainerman(fn, t, n=160)
            assert 0 < C < math.inf
            ck.append(C)
            _, _, C = tb.testbench_weighted(fn, t, nu=0.5, n=160)
            assert 0 < C < math.inf
            cn.append(C)
            _, _, C = tb.testbench_weighted(fn, t, ell=0.0, n=160)
            assert 0 < C < math.inf
            cl.append(C)
        # +-20% stability is asserted on the family each bound is sharp
        # for; on the other family the bound is increasingly slack and
        # the ratio decays by design
        if fn.family == "shell":
            assert spread(ck) <= 0.4, f"{fn.name}: klainerman spread {spread(ck)}"
            assert spread(cn) <= 0.4, f"{fn.name}: pointwise spread {spread(cn)}"
        else:
            assert spread(cl) <= 0.4, f"{fn.name}: L2-weighted spread {spread(cl)}"
    grid = Grid2D(L=2.0, n=128)
    for seed in range(20):
        u1, u2 = tb.random_bump_field(grid, 1.5, seed=seed)
        lhs, rhs = tb.testbench_divcurl(u1, u2, grid)
        assert lhs <= rhs * (1 + 1e-3)
    elapsed = time.time() - t0
    report(9, f"div-curl, cone-weighted sup, and weighted bounds hold on the "
              f"10-member catalog with t-stable constants (+-20%); {elapsed:.0f}s")
