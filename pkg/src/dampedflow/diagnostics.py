"""Blowup functionals, ODE-inequality monitors, and weighted energies.

The half-plane functionals

    q0(l) = int_{x1>l} (x1-l)^2 (rho(0,x) - rho_bar) dx
    q1(l) = 2 int_{x1>l} (x1-l) (rho u1)(0,x) dx
    P(t,l) = int_{x1>l} (x1-l)^2 (rho(t,x) - rho_bar) dx

are evaluated by cell-centered midpoint quadrature with exact clipping of
the weight at x1 = l (the weight and its x1-derivative vanish there, so
the clipping error is third order in h).  From P the doubly integrated
functional F is built through its identity

    F''(t) = int_{t+M0}^{t+M} P(t,l) dl/sqrt(l),

with F' and F recovered by cumulative quadrature from F(0) = F'(0) = 0.
The monitors track the ratios

    r1 = F''(t) (t+M) / eps
    r2 = F''(t) (t+M)^3 log(t/M+1) / F(t)^2
    r3 = F''(t) (t+M)^(1+gamma) log(t/M+1)^(gamma/2) / F(t)^gamma   (1<gamma<2)

whose empirical infima must stay positive for compliant Case-3/4 data.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import CaseLabel
from .euler2d import FlowState2D, d1, gradient, l2_norm, rho_from_theta
from .specfun import HyperParams


@dataclass(frozen=True)
class BlowupData:
    """Geometry/strength parameters for a compliant blowup experiment.

    Invariants: 0 <= M_tilde < M; max(M_tilde, M - delta0) <= M0 < M;
    Lambda >= 3*ab for the law's series parameters.
    """

    M: float
    M0: float
    Lambda: float
    M_tilde: float = 0.0
    delta0: float = 1.0
    prod_ab: float = 0.0

    @classmethod
    def for_law(cls, law, M, M0, Lambda, M_tilde=0.0, delta0=None):
        if delta0 is None:
            from .specfun import delta0_search
            delta0 = delta0_search(law)
        return cls(M=M, M0=M0, Lambda=Lambda, M_tilde=M_tilde, delta0=delta0,
                   prod_ab=HyperParams.from_law(law).prod_ab)

    def __post_init__(self):
        if not 0.0 <= self.M_tilde < self.M:
            raise ValueError("need 0 <= M_tilde < M")
        if not max(self.M_tilde, self.M - self.delta0) <= self.M0 < self.M:
            raise ValueError("need max(M_tilde, M - delta0) <= M0 < M")
        if self.Lambda < 3.0 * self.prod_ab:
            raise ValueError("need Lambda >= 3*ab")


# ---------------------------------------------------------------------------
# half-plane quadrature

def _halfplane_weights(centers, h, l, power):
    """Exact integral of (x1-l)^power over each cell [c-h/2, c+h/2] cut at
    x1=l; l may be scalar or an array (result is then (len(l), len(centers)))."""
    l = np.asarray(l, dtype=float)
    a = centers - h / 2.0
    b = centers + h / 2.0
    if l.ndim:
        a = a[None, :]
        b = b[None, :]
        l = l[:, None]
    lo = np.maximum(a, l)
    p1 = power + 1
    out = ((b - l) ** p1 - (lo - l) ** p1) / p1
    return np.where(b > l, out, 0.0)


def halfplane_moment(field, grid, l, power):
    """int_{x1>l} (x1-l)^power field dx by clipped midpoint quadrature.

    The integral factorizes into per-column weights times the field's
    x2-sums, so an array of l values costs one small matrix product.
    """
    w = _halfplane_weights(grid.axis(), grid.h, l, power)
    rowsum = field.sum(axis=1)
    out = (w @ rowsum) * grid.h
    return float(out) if np.ndim(l) == 0 else out


def q0(rho, grid, l, rho_bar=1.0):
    """Weighted mass excess on the half-plane x1 > l (scalar or array l)."""
    return halfplane_moment(rho - rho_bar, grid, l, 2)


def q1(momentum1, grid, l):
    """Twice the (x1-l)-weighted x1-momentum on the half-plane x1 > l."""
    return 2.0 * halfplane_moment(momentum1, grid, l, 1)


def outward_push_data(rho0, Lambda, X, rho_bar=1.0):
    """Outward-push data u1 = x1*rho0*Lambda/rho_bar, u2 = 0.

    For rho0 > 0 this yields q0(l) > 0 for every l below the support
    radius and q1(l) >= 2*Lambda*q0(l) for l >= 0, satisfying the blowup
    hypotheses with room to spare.
    """
    if np.any(rho0 < 0.0):
        raise ValueError("rho0 must be non-negative")
    u1 = X * rho0 * Lambda / rho_bar
    return rho0, (u1, np.zeros_like(u1))


def p_functional(state, l_grid, gas):
    """P(t, l) for each l, from the state's derived density."""
    drho = rho_from_theta(gas, state.theta) - gas.rho_bar
    return halfplane_moment(drho, state.grid, np.asarray(l_grid, dtype=float), 2)


def f_source(state, l_grid, gas):
    """Source of the half-plane wave inequality,

        f(t, l) = int_{x1>l} 2 rho u1^2 dx + G(t, l),
        G(t, l) = int_{x1>l} 2 (p - pbar - (rho - rho_bar)) dx,

    from solver fields.  Non-negative for gamma >= 2 (pressure convexity
    gives p - pbar - (rho - rho_bar) >= 0 pointwise under c(rho_bar)=1);
    near a detected blowup the quadrature degrades, so consumers stop at
    0.9x the detection time.
    """
    rho = rho_from_theta(gas, state.theta)
    p = gas.pressure(rho)
    pbar = gas.pressure(gas.rho_bar)
    integrand = 2.0 * rho * state.u1 ** 2 + 2.0 * (p - pbar - (rho - gas.rho_bar))
    return halfplane_moment(integrand, state.grid,
                            np.asarray(l_grid, dtype=float), 0)


# ---------------------------------------------------------------------------
# F functional and monitors

def f_functional(times, P, lbar, M0, M):
    """(F, F', F'') from P sampled on l = t + lbar, lbar in [M0, M].

    P has shape (len(times), len(lbar)).  The substitution l = t + lbar
    turns the identity into F''(t) = int_{M0}^{M} P / sqrt(t+lbar) dlbar,
    evaluated by the trapezoid rule; F' and F accumulate from zero.
    """
    times = np.asarray(times, dtype=float)
    lbar = np.asarray(lbar, dtype=float)
    if lbar[0] < 0.0:
        raise ValueError("l grid must be non-negative")
    if np.max(np.diff(lbar)) > (M - M0) / 64.0 + 1e-12:
        raise ValueError("l grid spacing must not exceed (M - M0)/64")
    F2 = np.array([
        np.trapezoid(P[i] / np.sqrt(times[i] + lbar), lbar)
        for i in range(len(times))
    ])
    if len(times) == 1:
        return np.zeros(1), np.zeros(1), F2
    dt = np.diff(times)
    F1 = np.concatenate(([0.0], np.cumsum(0.5 * (F2[1:] + F2[:-1]) * dt)))
    F0 = np.concatenate(([0.0], np.cumsum(0.5 * (F1[1:] + F1[:-1]) * dt)))
    return F0, F1, F2


@dataclass
class MonitorReport:
    asserted: bool
    window: tuple = None
    times: np.ndarray = None
    ratio1: np.ndarray = None
    ratio2: np.ndarray = None
    ratio3: np.ndarray = None
    inf_ratio1: float = None
    inf_ratio2: float = None
    inf_ratio3: float = None
    note: str = ""


def monitor_ode_inequalities(times, F0, F2, eps, M, case, gamma=2.0,
                             t_hi=None, t_lo=None):
    """Empirical infima of the blowup ODE ratios over a valid window.

    Declines (asserted=False) outside Case 3/4.  The window upper end is
    t_hi (e.g. 0.9 * detected blowup time, or the series end).  The lower
    end defaults to M*e^2 -- where the log-weighted bound becomes
    meaningful -- unless that would leave less than half the window, in
    which case it falls back to half of t_hi; early times are harmless
    for positivity (the ratios diverge, not vanish, as t -> 0).
    """
    if case not in (CaseLabel.CASE3, CaseLabel.CASE4):
        return MonitorReport(asserted=False, note=f"wrong regime: {case}")
    times = np.asarray(times, dtype=float)
    if t_hi is None:
        t_hi = times[-1]
    if t_lo is None:
        t_lo = min(M * math.e ** 2, 0.5 * t_hi)
    sel = (times >= t_lo) & (times <= t_hi) & (times > 0.0)
    if not np.any(sel):
        return MonitorReport(asserted=False, window=(t_lo, t_hi),
                             note="empty monitor window")
    t = times[sel]
    f2 = np.asarray(F2)[sel]
    f0 = np.asarray(F0)[sel]
    r1 = f2 * (t + M) / eps
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.log(t / M + 1.0)
        r2 = f2 * (t + M) ** 3 * logw / np.where(f0 > 0.0, f0, np.nan) ** 2
        r3 = None
        if 1.0 < gamma < 2.0:
            r3 = (f2 * (t + M) ** (1.0 + gamma) * logw ** (gamma / 2.0)
                  / np.where(f0 > 0.0, f0, np.nan) ** gamma)
    rep = MonitorReport(
        asserted=True, window=(float(t_lo), float(t_hi)), times=t,
        ratio1=r1, ratio2=r2, ratio3=r3,
        inf_ratio1=float(np.nanmin(r1)),
        inf_ratio2=float(np.nanmin(r2)),
        inf_ratio3=float(np.nanmin(r3)) if r3 is not None else None,
    )
    return rep


# ---------------------------------------------------------------------------
# weighted energies

def _dt_central(fields_m, fields_p, dt):
    return (fields_p - fields_m) / (2.0 * dt)


def _check_equispaced(history):
    dts = [history[i + 1].t - history[i].t for i in range(len(history) - 1)]
    if max(dts) - min(dts) > 1e-9 * max(dts):
        raise ValueError("history levels must be equispaced in time")
    return dts[0]


def energy_calE(history, k, law):
    """Time-weighted energy (1+t)^lam * sum ||d_t^j grad^a Phi|| + ||Phi||
    over 1 <= j+|a| <= k, summed over Phi in {theta, u1, u2}.  k <= 2.
    history must hold >= 3 equispaced levels; evaluated at the middle."""
    if k > 2:
        raise ValueError("energy order is truncated to k <= 2")
    if k == 0:
        return sum(l2_norm(getattr(history[-1], n), history[-1].grid.h)
                   for n in ("theta", "u1", "u2"))
    if len(history) < 3:
        raise ValueError("need at least 3 history levels")
    sm, s0, sp = history[-3], history[-2], history[-1]
    dt = _check_equispaced([sm, s0, sp])
    h = s0.grid.h
    t = s0.t
    weight = (1.0 + t) ** law.lam
    total = 0.0
    for name in ("theta", "u1", "u2"):
        fm, f0, fp = getattr(sm, name), getattr(s0, name), getattr(sp, name)
        f_t = _dt_central(fm, fp, dt)
        norms = []
        if k >= 1:
            norms += [d1(f0, 0, h), d1(f0, 1, h), f_t]
        if k >= 2:
            f_tt = (fp - 2.0 * f0 + fm) / dt ** 2
            norms += [
                d1(d1(f0, 0, h), 0, h), d1(d1(f0, 0, h), 1, h),
                d1(d1(f0, 1, h), 1, h),
                d1(f_t, 0, h), d1(f_t, 1, h), f_tt,
            ]
        total += weight * sum(l2_norm(g, h) for g in norms) + l2_norm(f0, h)
    return total


def _z_fields(history, idx, name):
    """Z_i Phi fields at history position idx (needs neighbors for d_t).

    Z = (d_t, d_1, d_2, S, R, H1, H2) with S = t d_t + x.grad,
    R = x1 d_2 - x2 d_1, H_i = x_i d_t + t d_i.
    """
    sm, s0, sp = history[idx - 1], history[idx], history[idx + 1]
    dt = 0.5 * (sp.t - sm.t)
    f0 = getattr(s0, name)
    f_t = _dt_central(getattr(sm, name), getattr(sp, name), dt)
    h = s0.grid.h
    X, Y = s0.grid.mesh()
    t = s0.t
    fx, fy = gradient(f0, h)
    return {
        "dt": f_t,
        "d1": fx,
        "d2": fy,
        "S": t * f_t + X * fx + Y * fy,
        "R": X * fy - Y * fx,
        "H1": X * f_t + t * fx,
        "H2": Y * f_t + t * fy,
    }


def energy_E(history, k):
    """Klainerman-weighted energy (1+t)^(1/2) sum ||d Z^a Phi||
    + (1+t)^(-1/2) ||Phi|| over |a| <= k-1, Phi in {theta, u1, u2}.

    k <= 2.  For k = 2 the history must hold >= 5 equispaced levels: each
    Z Phi is formed at the three middle levels, then the outer derivative
    is taken at the center.
    """
    if k > 2:
        raise ValueError("energy order is truncated to k <= 2")
    need = 3 if k == 1 else 5
    if len(history) < need:
        raise ValueError(f"need at least {need} history levels for k={k}")
    levels = history[-need:]
    _check_equispaced(levels)
    mid = need // 2
    s0 = levels[mid]
    h = s0.grid.h
    dt = levels[mid + 1].t - levels[mid].t
    t = s0.t
    total = 0.0
    for name in ("theta", "u1", "u2"):
        f0 = getattr(s0, name)
        f_t = _dt_central(getattr(levels[mid - 1], name), getattr(levels[mid + 1], name), dt)
        fx, fy = gradient(f0, h)
        norms = [l2_norm(g, h) for g in (f_t, fx, fy)]
        if k >= 2:
            z_mid = {key: None for key in ("dt", "d1", "d2", "S", "R", "H1", "H2")}
            z_levels = [_z_fields(levels, i, name) for i in (mid - 1, mid, mid + 1)]
            for key in z_levels[0]:
                zf = z_levels[1][key]
                zf_t = _dt_central(z_levels[0][key], z_levels[2][key], dt)
                zx, zy = gradient(zf, h)
                norms += [l2_norm(g, h) for g in (zf_t, zx, zy)]
        total += math.sqrt(1.0 + t) * sum(norms) + l2_norm(f0, h) / math.sqrt(1.0 + t)
    return total


def sigma_minus(t, x1, x2=0.0):
    """Distance-to-light-cone weight sqrt(1 + (r - t)^2)."""
    r = np.sqrt(np.asarray(x1, dtype=float) ** 2 + np.asarray(x2, dtype=float) ** 2)
    return np.sqrt(1.0 + (r - t) ** 2)
