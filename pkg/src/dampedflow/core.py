"""Damping laws, integrating factors, and the case phase diagram.

The friction coefficient is alpha(t) = mu/(1+t)**lam.  Its integrating
factor Xi solves Xi' = alpha*Xi, Xi(0) = 1:

    Xi(t) = exp(mu/(1-lam) * ((1+t)**(1-lam) - 1))   for lam != 1
    Xi(t) = (1+t)**mu                                for lam == 1

The (lam, mu) quadrant splits into four regimes (d = 2 or 3):

    Case 1:  0 <= lam < 1, mu > 0            global existence
    Case 2:  lam = 1, mu > 3-d               global (irrotational data)
    Case 3:  lam = 1, mu <= 3-d, d = 2       blowup
    Case 4:  lam > 1, mu > 0                 blowup

The branch at lam == 1 is exact: configs carry decimal strings and the
comparison is done on the parsed float, with no epsilon band.
"""

import math
from dataclasses import dataclass
from enum import Enum

from scipy.integrate import quad


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge; carries the partial estimate."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class CaseLabel(Enum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4


@dataclass(frozen=True)
class DampingLaw:
    """Friction pair (mu, lam) for alpha(t) = mu/(1+t)**lam."""

    mu: float
    lam: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")


@dataclass(frozen=True)
class GasLaw:
    """Polytropic gas p = A*rho**gamma, normalized so c(rho_bar) = 1.

    The constructor solves A*gamma*rho_bar**(gamma-1) = 1 for A, so only
    gamma and rho_bar are free.
    """

    gamma: float
    rho_bar: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.rho_bar > 0:
            raise ValueError(f"rho_bar must be positive, got {self.rho_bar}")

    @property
    def A(self):
        return 1.0 / (self.gamma * self.rho_bar ** (self.gamma - 1.0))

    def pressure(self, rho):
        return self.A * rho ** self.gamma

    def sound_speed_sq(self, rho):
        return self.A * self.gamma * rho ** (self.gamma - 1.0)


def alpha(law, t):
    """Friction coefficient mu/(1+t)**lam at time t >= 0."""
    return law.mu / (1.0 + t) ** law.lam


def xi(law, t):
    """Integrating factor Xi(t) with Xi(0) = 1 and Xi' = alpha*Xi.

    Saturates to inf where the exponential overflows double range
    (lam < 1 at very large t)."""
    if law.lam == 1.0:
        return (1.0 + t) ** law.mu
    arg = law.mu / (1.0 - law.lam) * ((1.0 + t) ** (1.0 - law.lam) - 1.0)
    return math.exp(arg) if arg < 709.0 else math.inf


def xi_integral_converges(law):
    """Whether I(inf) = int_0^inf ds/Xi(s) is finite.

    Finite exactly when 0 <= lam < 1, or lam = 1 with mu > 1.  This is the
    dichotomy that decides global existence for the damped Burgers model.
    """
    if law.lam < 1.0:
        return True
    if law.lam == 1.0:
        return law.mu > 1.0
    return False


def xi_inverse_integral(law, t):
    """I(t) = int_0^t ds/Xi(s).  Accepts t = math.inf.

    Closed forms for lam in {0, 1}; adaptive quadrature (relative
    tolerance 1e-10) otherwise.  I(inf) is +inf unless the law satisfies
    `xi_integral_converges`.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    mu, lam = law.mu, law.lam
    if lam == 0.0:
        if math.isinf(t):
            return 1.0 / mu
        return -math.expm1(-mu * t) / mu
    if lam == 1.0:
        if mu == 1.0:
            return math.inf if math.isinf(t) else math.log1p(t)
        if math.isinf(t):
            return 1.0 / (mu - 1.0) if mu > 1.0 else math.inf
        return ((1.0 + t) ** (1.0 - mu) - 1.0) / (1.0 - mu)
    if math.isinf(t) and not xi_integral_converges(law):
        return math.inf

    if lam < 1.0:
        # substituting w = (1+s)**(1-lam) turns the integral into incomplete
        # gamma functions, exact at every t; the difference is taken in
        # whichever (lower/upper) form is well conditioned
        if math.isinf(t):
            return _tail_integral_gamma(mu, lam, 0.0)
        if t > 10.0:
            log_decay = mu / (1.0 - lam) * ((1.0 + t) ** (1.0 - lam) - 1.0)
            if log_decay >= 1.0:
                return _gamma_integral_difference(mu, lam, t)
            # nearly undamped over (0, t): rescale to a unit interval so
            # quadrature does not accumulate long-interval roundoff
            val, err = quad(lambda u: t / xi(law, t * u), 0.0, 1.0,
                            epsabs=0.0, epsrel=1e-12, limit=200)
            if err > 1e-8 * max(abs(val), 1e-300):
                raise QuadratureError(f"scaled quadrature not converged "
                                      f"(err={err})", val)
            return val
    else:
        # lam > 1: on long intervals a termwise-integrated exponential
        # series (positive terms, no cancellation) beats quadrature roundoff
        if t > 10.0:
            head = xi_inverse_integral(law, 10.0)
            return head + _exp_series_integral(mu / (lam - 1.0), lam, 10.0, t)
    integrand = lambda s: 1.0 / xi(law, s)
    val, err = quad(integrand, 0.0, t, epsabs=1e-14, epsrel=1e-10, limit=200)
    if err > 1e-8 * max(abs(val), 1e-300):
        raise QuadratureError(f"quadrature not converged (err={err})", val)
    return val


def _gamma_integral_difference(mu, lam, t):
    """I(t) for 0 < lam < 1 as a conditioned incomplete-gamma difference."""
    from scipy.special import gammainc, gammaincc, gammaln

    beta = mu / (1.0 - lam)
    a = 1.0 / (1.0 - lam)
    w_t = (1.0 + t) ** (1.0 - lam)
    lo_t = gammainc(a, beta * w_t)
    if lo_t <= 0.5:
        # left tail: lower incompletes carry relative accuracy
        diff = lo_t - gammainc(a, beta)
    else:
        diff = gammaincc(a, beta) - gammaincc(a, beta * w_t)
    if diff <= 0.0:
        return 0.0
    log_val = beta + math.log(diff) + gammaln(a) - a * math.log(beta) \
        - math.log(1.0 - lam)
    return math.exp(log_val)


def _exp_series_integral(beta, lam, a, b):
    """int_a^b exp(-beta * (1 - (1+s)**(1-lam))) ds for lam > 1, by
    integrating the exponential series termwise.  The e^(-beta) factor is
    folded into the coefficients (Poisson weights), so nothing overflows."""
    total = 0.0
    coeff = math.exp(-beta)
    for k in range(0, 500):
        if k > 0:
            coeff *= beta / k
        p = k * (1.0 - lam) + 1.0
        if abs(p) < 1e-12:
            term = math.log((1.0 + b) / (1.0 + a))
        else:
            term = ((1.0 + b) ** p - (1.0 + a) ** p) / p
        total += coeff * term
        if k > 2 and coeff * max(term, 0.0) < 1e-17 * abs(total) and k > beta:
            break
    return total


def _tail_integral_gamma(mu, lam, t_star):
    # int_{t*}^inf exp(-beta((1+s)^(1-lam)-1)) ds for 0 < lam < 1, via
    # w = (1+s)^(1-lam):  e^beta/(1-lam) * beta^(-a) * Gamma(a, beta*w*),
    # a = 1/(1-lam).
    from scipy.special import gammaincc, gammaln

    beta = mu / (1.0 - lam)
    a = 1.0 / (1.0 - lam)
    w_star = (1.0 + t_star) ** (1.0 - lam)
    # Gamma(a, x) = gammaincc(a, x) * Gamma(a); work in logs to dodge overflow.
    reg = gammaincc(a, beta * w_star)
    if reg == 0.0:
        return 0.0
    log_tail = beta + math.log(reg) + gammaln(a) - a * math.log(beta) - math.log(1.0 - lam)
    return math.exp(log_tail)


def classify_case(law, d):
    """Phase-diagram label for (law, dimension)."""
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    if law.lam < 1.0:
        return CaseLabel.CASE1
    if law.lam == 1.0:
        if law.mu > 3 - d:
            return CaseLabel.CASE2
        # mu <= 3-d requires d = 2 (mu <= 0 is impossible for d = 3)
        return CaseLabel.CASE3
    return CaseLabel.CASE4
