"""Hypergeometric series, Riemann kernel, and the half-plane lower bound.

The kernel machinery lives in characteristic coordinates xi = 1+t-l,
zeta = 1+t+l.  The series

    Psi(a, b, c; z) = sum_n (a)_n (b)_n / (n! (c)_n) z^n

is evaluated with a + b = 1 and a*b = mu*lam/2 (lam > 1) or
(mu/2)(1 - mu/2) (lam = 1).  The roots a, b may be complex conjugates,
but every term is real because

    (a)_n (b)_n = prod_{k=0}^{n-1} (k^2 + k*(a+b) + a*b),

so the implementation never materializes complex numbers.  The Riemann
kernel attached to a damping law is

    R(p; pA) = [Xi(xi+zeta-1)/Xi(xiA+zetaA-1)]^(2^(lam-2)) * Psi(a,b,1;z),

    z = -(xiA-xi)(zetaA-zeta) / ((xiA+zetaA)(xi+zeta)),

and satisfies L*R = [2^(lam-2)*mu*lam/s^(lam+1) - ab/s^2
- 4^(lam-2)*mu^2/s^(2*lam)] * R with s = xi+zeta; the bracket vanishes
identically for lam = 1.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import dblquad

from .core import DampingLaw, QuadratureError, xi

MAX_TERMS = 100_000
_STOP_REL = 1e-14


class SeriesError(RuntimeError):
    """The Psi series failed its stopping rule within MAX_TERMS terms."""


@dataclass(frozen=True)
class HyperParams:
    """Real invariants (a+b, ab) of the series parameters plus c."""

    prod_ab: float
    c: float = 1.0
    sum_ab: float = 1.0

    @classmethod
    def from_law(cls, law, c=1.0):
        if law.lam > 1.0:
            return cls(prod_ab=law.mu * law.lam / 2.0, c=c)
        if law.lam == 1.0:
            return cls(prod_ab=(law.mu / 2.0) * (1.0 - law.mu / 2.0), c=c)
        raise ValueError("parameter map is defined only for lam >= 1")


def pochhammer_product(params, n):
    """(a)_n (b)_n as the real product prod_{k<n} (k^2 + k*sum_ab + prod_ab)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1.0
    for k in range(n):
        out *= k * k + k * params.sum_ab + params.prod_ab
    return out


def _psi_series(sum_ab, prod_ab, c, z, shift=0):
    """Truncated series with index-shifted Pochhammer factors.

    shift=0 gives Psi(a,b,c;z); shift=1 gives Psi(a+1,b+1,c;z) via
    (a+1)_n (b+1)_n = prod_{k=1}^{n} (k^2 + k*sum_ab + prod_ab).
    Vectorized over z; stops once three consecutive terms fall below
    _STOP_REL relative to the partial sum everywhere.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z > 0.0) or np.any(z <= -1.0):
        raise ValueError("z must lie in (-1, 0]")
    term = np.ones_like(z)
    total = np.ones_like(z)
    quiet = 0
    for n in range(MAX_TERMS):
        k = n + shift
        term = term * ((k * k + k * sum_ab + prod_ab) / ((n + 1.0) * (c + n))) * z
        total = total + term
        if np.all(np.abs(term) < _STOP_REL * np.abs(total)):
            quiet += 1
            if quiet >= 3:
                return total[0] if scalar else total
        else:
            quiet = 0
    raise SeriesError(f"series did not converge within {MAX_TERMS} terms")


def psi(params, z):
    """Psi(a, b, c; z) on z in (-1, 0]."""
    return _psi_series(params.sum_ab, params.prod_ab, params.c, z)


def psi_shifted(params, z):
    """Psi(a+1, b+1, 2; z): the kernel's boundary companion series."""
    return _psi_series(params.sum_ab, params.prod_ab, 2.0, z, shift=1)


def psi_raised(params, z):
    """Psi(a+1, b+1, c+1; z), the series appearing in the derivative identity

    d/dz Psi(a,b,c;z) = (ab/c) * Psi(a+1, b+1, c+1; z).
    """
    return _psi_series(params.sum_ab, params.prod_ab, params.c + 1.0, z, shift=1)


DELTA0_RESOLUTION = 2.0 ** -12
DELTA0_SAMPLES = 256


def delta0_search(law, resolution=DELTA0_RESOLUTION, samples=DELTA0_SAMPLES):
    """Largest delta0 on the dyadic grid with both Psi values in [1/2, 3/2]
    for all z in [-delta0/2, 0].

    delta0 lives in (0, 1), so the search tops out at 1 - resolution.
    Raises if even the smallest grid value fails (parameter pathology).
    """
    params = HyperParams.from_law(law)

    def valid(k):
        d = k * resolution
        zs = np.linspace(-d / 2.0, 0.0, samples)
        p1 = psi(params, zs)
        p2 = psi_shifted(params, zs)
        return bool(
            np.all(p1 >= 0.5) and np.all(p1 <= 1.5)
            and np.all(p2 >= 0.5) and np.all(p2 <= 1.5)
        )

    lo, hi = 1, int(round(1.0 / resolution)) - 1
    if not valid(lo):
        raise ValueError(f"no delta0 found at resolution {resolution} for {law}")
    if valid(hi):
        return hi * resolution
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if valid(mid):
            lo = mid
        else:
            hi = mid
    return lo * resolution


@dataclass(frozen=True)
class CharPoint:
    xi: float
    zeta: float


def to_characteristic(t, l):
    """(t, l) -> (xi, zeta) = (1+t-l, 1+t+l)."""
    return CharPoint(xi=1.0 + t - l, zeta=1.0 + t + l)


def from_characteristic(p):
    """Inverse of `to_characteristic`."""
    return (p.xi + p.zeta) / 2.0 - 1.0, (p.zeta - p.xi) / 2.0


def riemann_z(p, pA):
    """Series argument z = -((xiA-xi)(zetaA-zeta)) / ((xiA+zetaA)(xi+zeta))."""
    den = (pA.xi + pA.zeta) * (p.xi + p.zeta)
    if den == 0.0:
        raise ZeroDivisionError("degenerate characteristic denominators")
    return -((pA.xi - p.xi) * (pA.zeta - p.zeta)) / den


def riemann_R(p, pA, law, params=None):
    """Riemann kernel R(p; pA) for the damped wave operator."""
    if params is None:
        params = HyperParams.from_law(law)
    if p.xi + p.zeta <= 1.0 or pA.xi + pA.zeta <= 1.0:
        raise ValueError("kernel needs xi + zeta > 1 (time argument of Xi)")
    z = riemann_z(p, pA)
    ratio = xi(law, p.xi + p.zeta - 1.0) / xi(law, pA.xi + pA.zeta - 1.0)
    power = math.exp((law.lam - 2.0) * math.log(2.0))
    return ratio ** power * psi(params, z)


def adjoint_rhs_bracket(law, s, params=None):
    """Coefficient bracket of the closed-form identity for L*R at s = xi+zeta.

    For lam = 1 the bracket cancels algebraically (mu/2 - ab - mu^2/4 = 0
    with ab = (mu/2)(1 - mu/2)), so that branch returns exactly 0.
    """
    if params is None:
        params = HyperParams.from_law(law)
    mu, lam = law.mu, law.lam
    if lam == 1.0:
        return 0.0
    return (
        2.0 ** (lam - 2.0) * mu * lam / s ** (lam + 1.0)
        - params.prod_ab / s ** 2
        - 4.0 ** (lam - 2.0) * mu ** 2 / s ** (2.0 * lam)
    )


def adjoint_residual(p, pA, law, h):
    """Finite-difference L*R minus its closed form; O(h^2) as h -> 0.

    L*R = d2R/dxidzeta - 2^(lam-2)*mu/s^lam * (dR/dxi + dR/dzeta)
          + 2^(lam-1)*mu*lam/s^(lam+1) * R,   s = xi + zeta.
    """
    params = HyperParams.from_law(law)
    R = lambda x, z: riemann_R(CharPoint(x, z), pA, law, params)
    x, z = p.xi, p.zeta
    r0 = R(x, z)
    d_xz = (R(x + h, z + h) - R(x + h, z - h) - R(x - h, z + h) + R(x - h, z - h)) / (4.0 * h * h)
    d_x = (R(x + h, z) - R(x - h, z)) / (2.0 * h)
    d_z = (R(x, z + h) - R(x, z - h)) / (2.0 * h)
    s = x + z
    mu, lam = law.mu, law.lam
    lhs = (
        d_xz
        - 2.0 ** (lam - 2.0) * mu / s ** lam * (d_x + d_z)
        + 2.0 ** (lam - 1.0) * mu * lam / s ** (lam + 1.0) * r0
    )
    return lhs - adjoint_rhs_bracket(law, s, params) * r0


def p_lower_bound(t, l, q0, f, law, epsrel=1e-8):
    """Right side of the half-plane functional's lower bound:

        (1/4) Xi(t)^(-1/2) q0(l-t)
        + (1/4) int_0^t int_{l-t+tau}^{l+t-tau} sqrt(Xi(tau)/Xi(t)) f(tau,y) dy dtau

    evaluated by adaptive 2-D quadrature.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    lead = 0.25 * xi(law, t) ** -0.5 * q0(l - t)
    if t == 0.0:
        return lead
    sqrt_xi_t = math.sqrt(xi(law, t))

    def integrand(y, tau):
        return math.sqrt(xi(law, tau)) / sqrt_xi_t * f(tau, y)

    val, err = dblquad(
        integrand, 0.0, t,
        lambda tau: l - t + tau, lambda tau: l + t - tau,
        epsabs=1e-12, epsrel=epsrel,
    )
    if err > 1e-6 * max(abs(val), 1e-300):
        raise QuadratureError(f"double quadrature not converged (err={err})", val)
    return lead + 0.25 * val
