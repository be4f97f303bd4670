import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from dampedflow import (
    DampingLaw, FoldError, alpha, bump_profile, evolve_fan, fan_on_grid,
    grid_solve, lifespan, nwave_profile, xi, xi_inverse_integral,
)


def test_profiles_are_normalized():
    for prof in (bump_profile(), nwave_profile(), bump_profile(M=2.5)):
        assert_allclose(prof.min_slope, -1.0, rtol=1e-10)
        assert prof.v0[0] == 0.0 and prof.v0[-1] == 0.0


def test_fan_at_zero():
    prof = bump_profile()
    fan = evolve_fan(prof, 0.1, DampingLaw(1, 1), 0.0)
    assert_allclose(fan.position, prof.x, rtol=0, atol=0)
    assert_allclose(fan.value, 0.1 * prof.v0, rtol=0, atol=0)


def test_fan_value_times_xi_constant():
    prof = bump_profile()
    law = DampingLaw(0.7, 0.5)
    vals = []
    for t in (0.5, 2.0, 7.0):
        fan = evolve_fan(prof, 0.05, law, t)
        vals.append(fan.value * xi(law, t))
    for v in vals[1:]:
        assert_allclose(v, vals[0], rtol=1e-12)


def test_fan_known_decay():
    # lam=1, mu=2: Xi(3) = 16
    prof = bump_profile()
    fan = evolve_fan(prof, 0.1, DampingLaw(2, 1), 3.0)
    assert_allclose(fan.value, 0.1 * prof.v0 / 16.0, rtol=1e-14)


def test_fan_vertical_characteristics_outside_support():
    prof = bump_profile()
    fan = evolve_fan(prof, 0.1, DampingLaw(1, 1), 2.0)
    ends = prof.v0 == 0.0
    assert np.all(fan.position[ends] == prof.x[ends])


def test_fan_fold_error():
    prof = bump_profile()
    law = DampingLaw(0.5, 1)
    T = lifespan(prof, 0.1, law)
    with pytest.raises(FoldError):
        evolve_fan(prof, 0.1, law, T + 1.0)


def test_lifespan_closed_form_cases():
    prof = bump_profile()
    # 0.1 * 2[(1+T)^(1/2) - 1] = 1  =>  T = 35
    assert_allclose(lifespan(prof, 0.1, DampingLaw(0.5, 1)), 35.0, rtol=1e-10)
    # eps*|m|*I(inf) = 0.5 * 1 < 1: global
    assert lifespan(prof, 0.5, DampingLaw(2, 1)) == math.inf
    # lam > 1 always folds
    assert math.isfinite(lifespan(prof, 0.3, DampingLaw(1, 2)))
    assert math.isfinite(lifespan(prof, 1e-3, DampingLaw(0.5, 2)))


def test_lifespan_quadrature_branch_matches_bracketing():
    prof = bump_profile()
    law = DampingLaw(1.0, 1.5)
    T = lifespan(prof, 0.2, law)
    assert_allclose(0.2 * xi_inverse_integral(law, T), 1.0, rtol=1e-9)


def test_lifespan_monotone_in_eps_and_slope():
    prof = bump_profile()
    law = DampingLaw(1.0, 1.5)
    Ts = [lifespan(prof, e, law) for e in np.linspace(0.05, 1.0, 10)]
    assert np.all(np.diff(Ts) < 0)
    # |m| scales with the profile amplitude: sharper slope folds sooner
    base = bump_profile(normalize_slope=False)
    Ts = []
    for scale in np.linspace(0.5, 3.0, 10):
        p = bump_profile(normalize_slope=False)
        p.v0 = p.v0 * scale
        p.v0_prime = p.v0_prime * scale
        f, fp = base.v0_fun, base.v0_prime_fun
        p.v0_fun = lambda y, s=scale: s * f(y)
        p.v0_prime_fun = lambda y, s=scale: s * fp(y)
        Ts.append(lifespan(p, 0.2, law))
    assert np.all(np.diff(Ts) < 0)


def test_dichotomy_grid():
    prof = bump_profile()
    eps = 1e-3
    for lam in (0.0, 0.5, 0.9, 1.0, 1.1, 2.0):
        for mu in (0.5, 1.0, 2.0):
            T = lifespan(prof, eps, DampingLaw(mu, lam))
            expect_global = lam < 1.0 or (lam == 1.0 and mu > 1.0)
            assert (T == math.inf) == expect_global, (lam, mu, T)


def test_characteristic_formulas_against_ode_oracle():
    # independent check: integrate dx/dt = v, dv/dt = -alpha v directly
    prof = bump_profile()
    law = DampingLaw(0.8, 1.3)
    eps, t = 0.2, 2.5
    fan = evolve_fan(prof, eps, law, t)
    for idx in (500, 1000, 1500):
        x0 = prof.x[idx]
        sol = solve_ivp(
            lambda s, y: [y[1], -alpha(law, s) * y[1]],
            (0, t), [x0, eps * prof.v0[idx]],
            rtol=1e-11, atol=1e-13,
        )
        assert_allclose(sol.y[0, -1], fan.position[idx], rtol=1e-8, atol=1e-10)
        assert_allclose(sol.y[1, -1], fan.value[idx], rtol=1e-8, atol=1e-12)


def test_grid_nx_validation():
    with pytest.raises(ValueError):
        grid_solve(bump_profile(), 0.1, DampingLaw(1, 1), 1.0, nx=32)


def test_grid_matches_decay_envelope():
    # global case lam=0: sup|v| <= eps*max v0/Xi(t) + discretization slack
    prof = bump_profile()
    law = DampingLaw(1.0, 0.0)
    sol = grid_solve(prof, 0.1, law, 5.0, nx=512)
    sup_end = sol.sup_v[-1]
    envelope = 0.1 * prof.max_abs / xi(law, 5.0)
    assert sup_end <= envelope + 2e-4
    # and the grid solution tracks the exact fan pointwise
    vex = fan_on_grid(prof, 0.1, law, sol.times[-1], sol.x)
    assert np.abs(sol.snapshots[-1][1] - vex).max() < 5e-4


def test_grid_first_order_refinement():
    prof = bump_profile()
    law = DampingLaw(0.5, 1.0)
    errs = []
    for nx in (256, 512, 1024):
        sol = grid_solve(prof, 0.1, law, 8.0, nx=nx)
        t_final = sol.times[-1]
        vex = fan_on_grid(prof, 0.1, law, t_final, sol.x)
        errs.append(np.abs(sol.snapshots[-1][1] - vex).max())
    rate1 = errs[0] / errs[1]
    rate2 = errs[1] / errs[2]
    assert 1.5 < rate1 < 3.0
    assert 1.5 < rate2 < 3.0


def test_grid_detects_fold_for_supercritical_decay():
    prof = bump_profile()
    law = DampingLaw(1.0, 1.5)
    T = lifespan(prof, 0.2, law)
    sol = grid_solve(prof, 0.2, law, 1.6 * T, nx=4096)
    assert sol.detected_blowup_time is not None
    assert abs(sol.detected_blowup_time - T) / T < 0.05
