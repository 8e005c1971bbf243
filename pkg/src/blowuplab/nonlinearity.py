"""Regularly varying absorption terms f(u) = u^(sigma+1) L(u).

The growth of f at infinity decides existence of boundary blow-up
solutions: the classifier here tests convergence of the improper integral
of (q F)^(-1/p) (q the conjugate exponent of p, F the primitive of f),
which is finite exactly when f grows fast enough. The module also exposes
the asymptotic ratio limits that the rate formulas consume.

Slowly varying factors are restricted to a documented family (constant,
ln(1+u), ln ln(e+u), exp((ln u)^a) with a < 1) plus caller-provided
callables. Membership in the family is asserted, not proven.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, DivergentIntegralError, NonConvergentError
from .extrapolation import limit_estimate, limit_estimate_slow

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_RV_GRID = [10.0 ** (2 + j) for j in range(15)]


def _gl(fun, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid + half * _GL_NODES
    return half * float(np.sum(_GL_WEIGHTS * fun(x)))


def tail_integral(fun, a, rel_tol=1e-13, max_doublings=60):
    """integral_a^infty fun, by interval doubling plus a geometric remainder.

    Works for integrands with eventually power-like decay: the increments
    over [a 2^j, a 2^(j+1)] become geometric, and the remainder is summed
    from the last observed ratio. Raises DivergentIntegralError when the
    increments fail to decay.
    """
    total = 0.0
    lo = a
    inc_prev = None
    ratio = None
    for _ in range(max_doublings):
        hi = 2.0 * lo
        inc = _gl(fun, lo, hi)
        total += inc
        if inc_prev is not None and inc_prev > 0.0:
            ratio = inc / inc_prev
            if ratio >= 1.0:
                raise DivergentIntegralError(
                    "tail increments are not decaying; integral diverges")
            if inc < rel_tol * abs(total):
                break
        inc_prev = inc
        lo = hi
    else:
        if ratio is None or ratio > 0.9:
            raise DivergentIntegralError("tail integral failed to settle")
    if ratio is not None and 0.0 < ratio < 1.0:
        total += inc * ratio / (1.0 - ratio)
    return total


# ---------------------------------------------------------------------------
# the spec and its families
# ---------------------------------------------------------------------------

_SLOW_FAMILY = ("one", "log1p", "loglog")  # plus "explog:a" handled separately


def _slow_factor(name):
    """Returns (L, dL/du) for a named slowly varying factor."""
    if name == "one":
        return (lambda u: np.ones_like(np.asarray(u, dtype=float))), (lambda u: 0.0 * np.asarray(u))
    if name == "log1p":
        return (lambda u: np.log1p(u)), (lambda u: 1.0 / (1.0 + u))
    if name == "loglog":
        return (lambda u: np.log(np.log(np.e + u))), \
               (lambda u: 1.0 / ((np.e + u) * np.log(np.e + u)))
    if name.startswith("explog:"):
        a = float(name.split(":", 1)[1])
        if not (0.0 < a < 1.0):
            raise DomainError("explog factor needs exponent in (0, 1)")

        # frozen below u = e: only the behavior at infinity matters, and the
        # power of ln u is not real-valued below 1
        def L(u):
            return np.exp(np.log(np.maximum(u, np.e)) ** a)

        def Lp(u):
            u = np.asarray(u, dtype=float)
            lnu = np.log(np.maximum(u, np.e))
            return np.where(u > np.e, np.exp(lnu ** a) * a * lnu ** (a - 1.0) / u, 0.0)

        return L, Lp
    raise DomainError(f"unknown slowly varying factor {name!r}; "
                      f"known: {', '.join(_SLOW_FAMILY)}, explog:a")


@dataclass
class NonlinearitySpec:
    sigma: float
    slow_name: str = "one"
    slow: Optional[Callable] = None        # caller-provided L(u)
    slow_prime: Optional[Callable] = None

    def __post_init__(self):
        if self.slow is None:
            self.slow, self.slow_prime = _slow_factor(self.slow_name)
        elif self.slow_name in _SLOW_FAMILY:
            self.slow_name = "custom"

    @property
    def pure_power(self) -> bool:
        return self.slow_name == "one"

    @property
    def power(self) -> float:
        """The regular-variation index sigma + 1."""
        return self.sigma + 1.0

    def f(self, u):
        u = np.asarray(u, dtype=float)
        return u ** self.power * self.slow(u)

    def f_prime(self, u):
        u = np.asarray(u, dtype=float)
        if self.slow_prime is not None:
            return self.power * u ** self.sigma * self.slow(u) \
                + u ** self.power * self.slow_prime(u)
        h = u * 1e-6
        return (self.f(u + h) - self.f(u - h)) / (2.0 * h)

    def index_correction_scale(self, u):
        """Leading small parameter of t f'/f - (sigma+1) for this factor.

        Each documented slowly varying factor approaches the index at its
        own rate; extrapolating in the right variable is what makes the
        index estimate converge at desk scale.
        """
        u = np.asarray(u, dtype=float)
        if self.slow_name == "one":
            return 1.0 / np.log(u)
        if self.slow_name == "log1p":
            return 1.0 / np.log(u)
        if self.slow_name == "loglog":
            return 1.0 / (np.log(u) * np.log(np.log(u)))
        if self.slow_name.startswith("explog:"):
            a = float(self.slow_name.split(":", 1)[1])
            return np.log(u) ** (a - 1.0)
        return 1.0 / np.log(u)

    def validate(self):
        us = np.geomspace(1e-6, 1e10, 33)
        vals = self.f(us)
        if not np.all(np.isfinite(vals)) or not np.all(vals > 0):
            raise DomainError("f must be positive and finite on (0, infinity)")
        if not np.all(np.diff(vals) > 0):
            raise DomainError("f must be nondecreasing on (0, infinity)")
        idx = rv_index(self)
        if abs(idx - self.power) > 1e-3:
            raise DomainError(
                f"estimated variation index {idx:.6f} disagrees with sigma+1={self.power}")
        return self


def power_nonlinearity(power_q: float) -> NonlinearitySpec:
    """f(u) = u^power_q as a spec (sigma = power_q - 1)."""
    return NonlinearitySpec(sigma=power_q - 1.0)


# ---------------------------------------------------------------------------
# primitive and improper-integral classifier
# ---------------------------------------------------------------------------

def big_f(spec: NonlinearitySpec, t: float) -> float:
    """F(t) = integral_0^t f; closed form for pure powers, quadrature otherwise."""
    if t < 0:
        raise DomainError("F is defined for t >= 0")
    if t == 0.0:
        return 0.0
    if spec.pure_power:
        return t ** (spec.sigma + 2.0) / (spec.sigma + 2.0)
    val, err = quad(lambda u: float(spec.f(u)), 0.0, t,
                    epsabs=0.0, epsrel=1e-12, limit=200)
    if err > 1e-9 * abs(val):
        raise NonConvergentError(f"quadrature for F({t}) did not reach tolerance")
    return float(val)


@dataclass
class KOVerdict:
    convergent: Optional[bool]  # None when the critical case is left undecided
    integral_value: float       # math.inf marks divergence
    p: float
    status: str                 # "convergent" | "divergent" | "inconclusive"
    tail_exponent: float = math.nan


def conjugate(p: float) -> float:
    if p <= 1.0:
        raise DomainError("p must exceed 1")
    return p / (p - 1.0)


def keller_osserman(spec: NonlinearitySpec, p: float) -> KOVerdict:
    """Classify convergence of integral_1^infty (q F(t))^(-1/p) dt, q = p/(p-1).

    The tail exponent (sigma+2)/p against 1 decides the generic cases and a
    quadrature run confirms them. The critical exponent (sigma + 2 = p) is
    decided only for exact pure powers, where the divergence is logarithmic
    and certain; with a nontrivial slowly varying factor it is reported as
    inconclusive rather than guessed.
    """
    q = conjugate(p)
    tail = (spec.sigma + 2.0) / p
    if abs(tail - 1.0) < 1e-12:
        if spec.pure_power:
            return KOVerdict(convergent=False, integral_value=math.inf, p=p,
                             status="divergent", tail_exponent=tail)
        return KOVerdict(convergent=None, integral_value=math.nan, p=p,
                         status="inconclusive", tail_exponent=tail)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        if spec.pure_power:
            F = t ** (spec.sigma + 2.0) / (spec.sigma + 2.0)
        else:
            F = np.array([big_f(spec, ti) for ti in np.atleast_1d(t)])
        return (q * F) ** (-1.0 / p)

    if tail > 1.0:
        value = tail_integral(integrand, 1.0)
        return KOVerdict(convergent=True, integral_value=value, p=p,
                         status="convergent", tail_exponent=tail)
    # divergent branch: confirm increments are non-decaying before declaring
    try:
        tail_integral(integrand, 1.0, max_doublings=24)
    except DivergentIntegralError:
        return KOVerdict(convergent=False, integral_value=math.inf, p=p,
                         status="divergent", tail_exponent=tail)
    raise NonConvergentError(
        "analytic tail exponent says divergent but the quadrature converged")


def ko_tail(spec: NonlinearitySpec, p: float, z: float) -> float:
    """integral_z^infty (q F(s))^(-1/p) ds (the blow-up profile's defining tail)."""
    q = conjugate(p)
    if (spec.sigma + 2.0) / p <= 1.0:
        raise DivergentIntegralError("growth condition fails; tail diverges")

    if spec.pure_power:
        # exact: integrand is a pure power of s
        e = (spec.sigma + 2.0) / p
        c = (q / (spec.sigma + 2.0)) ** (-1.0 / p)
        return c * z ** (1.0 - e) / (e - 1.0)

    def integrand(s):
        s = np.asarray(s, dtype=float)
        F = np.array([big_f(spec, si) for si in np.atleast_1d(s)])
        return (q * F) ** (-1.0 / p)

    return tail_integral(integrand, z)


# ---------------------------------------------------------------------------
# asymptotic ratios
# ---------------------------------------------------------------------------

def rv_index(spec: NonlinearitySpec) -> float:
    """Extrapolated limit of t f'(t)/f(t); equals sigma + 1 for valid specs.

    Slowly varying factors approach the index only like 1/ln t, so the
    extrapolation falls back to a fit in that variable when geometric
    acceleration stalls.
    """
    samples = [float(t * spec.f_prime(t) / spec.f(t)) for t in _RV_GRID]
    xs = [float(spec.index_correction_scale(t)) for t in _RV_GRID]
    value, _ = limit_estimate_slow(samples, xs, rel_tol=1e-3,
                                   context="variation index")
    return value


def ratio_limits(spec: NonlinearitySpec, p: float) -> dict:
    """The two ratio limits feeding the rate constants, with closed-form targets.

    lim F(z)/(z f(z)) -> 1/(2+sigma), and
    lim F(z)^(1/q) / (f(z) * integral_z^infty F(s)^(-1/p) ds)
        -> (sigma+2-p)/(p(2+sigma)).
    """
    zgrid = [10.0 ** (2 + 0.5 * j) for j in range(11)]
    xs = [float(spec.index_correction_scale(z)) for z in zgrid]
    first = [big_f(spec, z) / (z * float(spec.f(z))) for z in zgrid]
    lim1, _ = limit_estimate_slow(first, xs, rel_tol=1e-3, context="F/(zf) limit")

    q = conjugate(p)
    second = []
    for z in zgrid:
        tail = ko_tail(spec, p, z) * conjugate(p) ** (1.0 / p)  # rescale to plain F^(-1/p)
        second.append(big_f(spec, z) ** (1.0 / q) / (float(spec.f(z)) * tail))
    lim2, _ = limit_estimate_slow(second, xs, rel_tol=1e-3,
                                  context="growth-ratio limit")

    sigma = spec.sigma
    return {
        "lim_F_over_zf": lim1,
        "lim_F_over_zf_target": 1.0 / (2.0 + sigma),
        "lim_keller_ratio": lim2,
        "lim_keller_ratio_target": (sigma + 2.0 - p) / (p * (2.0 + sigma)),
    }
