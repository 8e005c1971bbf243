"""Boundary weight generators and their small-argument limit structure.

A weight generator is a positive monotone function k on (0, nu) whose
primitive K(t) = integral_0^t s^(-alpha/2) k(s) ds steers every rate
constant in the package. The limits

    l0 = lim_{t->0+} K(t) / (t^(-alpha/2) k(t))        (always 0)
    l1 = lim_{t->0+} d/dt [ K(t) / (t^(-alpha/2) k(t)) ]

classify the weight at first order; the approach rate of the derivative
ratio to l1, measured against a probing scale y(t) (a power t^zeta or a
log scale (-ln t)^(-tau)), classifies it at second order.

Shipped families: pure powers t^q, ln(1 + t^q), exp(t^q) - 1, a log-scale
family engineered to have l1 = 0 with a prescribed second-order constant,
and tabulated weights from CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import (DomainError, NonConvergentError, NonIntegrableWeight,
                     WrongScaleError)
from .extrapolation import (limit_estimate, limit_estimate_loose,
                            limit_estimate_slow, truncate_noise_tail)

L1_ZERO_THRESHOLD = 1e-8  # |l1| below this means the l1 = 0 class
_LIMIT_GRID = [10.0 ** (-2 - 0.5 * j) for j in range(15)]
_SECOND_ORDER_GRID = [10.0 ** (-1 - 0.25 * j) for j in range(13)]


class Monotonicity(Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"


class SecondOrderClass(Enum):
    K0_TAU = "K0_tau"        # l1 = 0, log scale; value named L*
    K0_ZETA = "K0_zeta"      # l1 = 0, power scale; value named L_*
    K01_ZETA = "K01_zeta"    # l1 in (0,1], power scale; value named E_k
    K01_TAU = "K01_tau"      # l1 in (0,1], log scale; value named L#
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class YScale:
    """Probing scale for second-order limits: t^zeta or (-ln t)^(-tau)."""

    kind: str  # "power" | "log"
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "log"):
            raise DomainError(f"unknown scale kind {self.kind!r}")
        if self.exponent <= 0:
            raise DomainError("scale exponent must be positive")

    def __call__(self, t):
        if self.kind == "power":
            return t ** self.exponent
        return (-np.log(t)) ** (-self.exponent)

    def deriv(self, t):
        if self.kind == "power":
            return self.exponent * t ** (self.exponent - 1.0)
        return self.exponent * (-np.log(t)) ** (-self.exponent - 1.0) / t

    def deriv2(self, t):
        z = self.exponent
        if self.kind == "power":
            return z * (z - 1.0) * t ** (z - 2.0)
        ln = -np.log(t)
        return (z * (z + 1.0) * ln ** (-z - 2.0) - z * ln ** (-z - 1.0)) / t ** 2


def y_power(zeta=1.0):
    return YScale("power", zeta)


def y_log(tau=1.0):
    return YScale("log", tau)


@dataclass
class KaramataSpec:
    """A boundary weight generator with its singularity exponent.

    k must be positive and monotone on (0, nu); alpha is the distance-power
    exponent of the ambient operator (alpha < 2 keeps s^(-alpha/2) k(s)
    integrable at 0 for bounded k). Analytic hooks (k_prime, big_k_exact,
    ratio/ratio_prime) are filled in by the family constructors; generic
    specs fall back to quadrature and finite differences.
    """

    k: Callable[[float], float]
    alpha: float
    nu: float = 1.0
    k_prime: Optional[Callable[[float], float]] = None
    monotonicity: Monotonicity = Monotonicity.NONDECREASING
    label: str = "custom"
    # analytic fast paths, populated for the named families
    big_k_exact: Optional[Callable[[float], float]] = None
    ratio_exact: Optional[Callable[[float], float]] = None        # K/K'
    ratio_prime_exact: Optional[Callable[[float], float]] = None  # (K/K')'
    l1_exact: Optional[float] = None

    def __post_init__(self):
        if not (-1.0 < self.alpha < 2.0):
            # alpha < 2 is what integrability of s^(-alpha/2) needs;
            # alpha > -1 matches the operator's admissible range.
            raise NonIntegrableWeight(
                f"alpha={self.alpha} outside (-1, 2); the weight primitive diverges")
        if self.nu <= 0:
            raise DomainError("nu must be positive")

    def kprime(self, t):
        if self.k_prime is not None:
            return self.k_prime(t)
        h = t * 1e-6  # relative step respects the singular scale at 0
        return (self.k(t + h) - self.k(t - h)) / (2.0 * h)

    def kk(self, t):
        """K'(t) = t^(-alpha/2) k(t)."""
        return t ** (-self.alpha / 2.0) * self.k(t)

    def kk_prime(self, t):
        """K''(t) = (t^(-alpha/2) k(t))'."""
        a2 = self.alpha / 2.0
        return t ** (-a2) * (self.kprime(t) - a2 * self.k(t) / t)

    def validate(self, n_points=40):
        ts = np.geomspace(self.nu * 1e-8, self.nu * 0.999, n_points)
        vals = np.array([self.k(t) for t in ts])
        if not np.all(vals > 0):
            raise DomainError(f"{self.label}: k must be positive on (0, nu)")
        diffs = np.diff(vals)
        if self.monotonicity is Monotonicity.NONDECREASING:
            ok = np.all(diffs >= -1e-12 * np.abs(vals[1:]))
        else:
            ok = np.all(diffs <= 1e-12 * np.abs(vals[1:]))
        if not ok:
            raise DomainError(
                f"{self.label}: k is not {self.monotonicity.value} on the check grid")
        big_k(self, self.nu)  # raises NonIntegrableWeight on divergence
        return self


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------

def power_weight(q, alpha, nu=1.0):
    """k(t) = t^q with q > alpha/2. Everything about it is closed-form."""
    if q <= alpha / 2.0 - 1.0:
        raise NonIntegrableWeight(f"power q={q} too small for alpha={alpha}")
    e = 1.0 + q - alpha / 2.0  # exponent of K
    l1 = 1.0 / e
    return KaramataSpec(
        k=lambda t: t ** q,
        k_prime=(lambda t: q * t ** (q - 1.0)),
        alpha=alpha, nu=nu,
        monotonicity=Monotonicity.NONDECREASING if q >= 0 else Monotonicity.NONINCREASING,
        label=f"power(q={q})",
        big_k_exact=lambda t: t ** e / e,
        ratio_exact=lambda t: t / e,
        ratio_prime_exact=lambda t: l1 + 0.0 * t,
        l1_exact=l1,
    )


def log1p_power_weight(q, alpha, nu=1.0):
    """k(t) = ln(1 + t^q), q > 1 + alpha/2."""
    return KaramataSpec(
        k=lambda t: np.log1p(t ** q),
        k_prime=lambda t: q * t ** (q - 1.0) / (1.0 + t ** q),
        alpha=alpha, nu=nu,
        monotonicity=Monotonicity.NONDECREASING,
        label=f"log1p_power(q={q})",
        l1_exact=1.0 / (1.0 + q - alpha / 2.0),
    )


def expm1_power_weight(q, alpha, nu=1.0):
    """k(t) = exp(t^q) - 1, q > 1 + alpha/2."""
    return KaramataSpec(
        k=lambda t: np.expm1(t ** q),
        k_prime=lambda t: q * t ** (q - 1.0) * np.exp(t ** q),
        alpha=alpha, nu=nu,
        monotonicity=Monotonicity.NONDECREASING,
        label=f"expm1_power(q={q})",
        l1_exact=1.0 / (1.0 + q - alpha / 2.0),
    )


def logscale_weight(lstar, tau, alpha, nu=0.5):
    """A weight with l1 = 0 whose derivative ratio decays like lstar * (-ln t)^(-tau).

    Built backwards from K/K' = lstar * t * (-ln t)^(-tau), which integrates to
    K(t) = exp(-(-ln t)^(tau+1) / (lstar (tau+1))). k is then t^(alpha/2) K'.
    """
    if lstar <= 0 or tau <= 0:
        raise DomainError("lstar and tau must be positive")

    c = lstar * (tau + 1.0)

    # k is monotone only where (alpha/2 - 1) + L^tau/lstar - tau/L >= 0
    # with L = -ln t; clip the domain to that region
    def _slope(L):
        return (alpha / 2.0 - 1.0) + L ** tau / lstar - tau / L

    L0 = 1.0
    while _slope(L0) <= 0.0 and L0 < 1e6:
        L0 *= 2.0
    lo = L0 / 2.0 if L0 > 1.0 else 1e-6
    for _ in range(200):
        mid = 0.5 * (lo + L0)
        if _slope(mid) > 0.0:
            L0 = mid
        else:
            lo = mid
    nu = min(nu, 0.95 * math.exp(-L0))

    def K(t):
        return np.exp(-((-np.log(t)) ** (tau + 1.0)) / c)

    def Kp(t):
        return K(t) * (-np.log(t)) ** tau / (lstar * t)

    def k(t):
        return t ** (alpha / 2.0) * Kp(t)

    def kp(t):
        ln = -np.log(t)
        # logarithmic derivative of k assembled from its three factors
        dlog = (alpha / 2.0 - 1.0) / t + ln ** tau / (lstar * t) - tau / (t * ln)
        return k(t) * dlog

    def ratio(t):
        return lstar * t * (-np.log(t)) ** (-tau)

    def ratio_prime(t):
        ln = -np.log(t)
        return lstar * (ln ** (-tau) + tau * ln ** (-tau - 1.0))

    return KaramataSpec(
        k=k, k_prime=kp, alpha=alpha, nu=nu,
        monotonicity=Monotonicity.NONDECREASING,
        label=f"logscale(L*={lstar}, tau={tau})",
        big_k_exact=K, ratio_exact=ratio, ratio_prime_exact=ratio_prime,
        l1_exact=0.0,
    )


def table_weight(ts, ks, alpha, monotonicity=Monotonicity.NONDECREASING):
    """Tabulated weight from (t, k(t)) samples; log-log interpolated."""
    ts = np.asarray(ts, dtype=float)
    ks = np.asarray(ks, dtype=float)
    if ts.ndim != 1 or ts.shape != ks.shape or len(ts) < 4:
        raise DomainError("table weight needs two equal columns with >= 4 rows")
    if np.any(ts <= 0) or np.any(ks <= 0) or np.any(np.diff(ts) <= 0):
        raise DomainError("table weight needs positive, strictly increasing t and positive k")
    from scipy.interpolate import PchipInterpolator
    interp = PchipInterpolator(np.log(ts), np.log(ks), extrapolate=True)

    def k(t):
        return np.exp(interp(np.log(t)))

    return KaramataSpec(k=k, alpha=alpha, nu=float(ts[-1]),
                        monotonicity=monotonicity, label="table")


# ---------------------------------------------------------------------------
# the primitive K and first-order limits
# ---------------------------------------------------------------------------

def big_k(spec: KaramataSpec, t: float) -> float:
    """K(t) = integral_0^t s^(-alpha/2) k(s) ds, singularity-aware.

    The substitution s = tau^(2/(2-alpha)) absorbs the endpoint singularity
    exactly, leaving a bounded integrand for every alpha in (-1, 2).
    """
    if not (0.0 < t <= spec.nu):
        raise DomainError(f"t={t} outside (0, nu={spec.nu}]")
    if spec.big_k_exact is not None:
        return float(spec.big_k_exact(t))
    m = 2.0 / (2.0 - spec.alpha)

    def integrand(u):
        return spec.k(u ** m)

    upper = t ** (1.0 / m)
    val, err = quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-12, limit=200)
    val *= m
    if not math.isfinite(val) or val <= 0:
        raise NonIntegrableWeight(f"{spec.label}: primitive not finite at t={t}")
    if err * m > 1e-8 * abs(val):
        raise NonIntegrableWeight(
            f"{spec.label}: quadrature for K(t) did not reach tolerance at t={t}")
    return float(val)


def _ratio(spec, t):
    """g(t) = K(t) / K'(t)."""
    if spec.ratio_exact is not None:
        return float(spec.ratio_exact(t))
    return big_k(spec, t) / spec.kk(t)


def _ratio_prime(spec, t):
    """g'(t) = 1 - K K'' / K'^2; the quantity whose limit is l1."""
    if spec.ratio_prime_exact is not None:
        return float(spec.ratio_prime_exact(t))
    kkp = spec.kk(t)
    return 1.0 - big_k(spec, t) * spec.kk_prime(t) / (kkp * kkp)


@dataclass
class KaramataLimits:
    l0: float
    l1: float
    nrvz_index_k: float
    l1_err: float = 0.0
    second_order_class: SecondOrderClass = SecondOrderClass.UNCLASSIFIED
    second_order_value: float = math.nan
    y_kind: Optional[YScale] = None


def estimate_limits(spec: KaramataSpec) -> KaramataLimits:
    """Estimate l0, l1 and the regular-variation index of k at 0.

    Samples the ratio K/K' and its derivative on the grid t = 10^(-2-j/2)
    and extrapolates; the index of k is read as a log-log slope and
    cross-checked against 1/l1 - 1 + alpha/2.
    """
    grid = [t for t in _LIMIT_GRID if t < spec.nu]
    xs = [1.0 / (-math.log(t)) for t in grid]
    ratios = [_ratio(spec, t) for t in grid]
    l0, _ = limit_estimate_slow(ratios, xs, rel_tol=1e-4, context=f"{spec.label}: l0")

    primes = [_ratio_prime(spec, t) for t in grid]
    l1, l1_err = limit_estimate_slow(primes, xs, rel_tol=1e-4,
                                     context=f"{spec.label}: l1")

    if abs(l1) < L1_ZERO_THRESHOLD:
        index = math.inf  # k varies faster than any power at 0
    else:
        slopes = []
        for t in grid:
            h = 0.05
            slopes.append((math.log(spec.k(t * (1 + h))) - math.log(spec.k(t * (1 - h))))
                          / (math.log(1 + h) - math.log(1 - h)))
        index, _, converged = limit_estimate_loose(slopes)
        if not converged:
            raise NonConvergentError(f"{spec.label}: log-log slope of k does not settle")
    return KaramataLimits(l0=l0, l1=l1, nrvz_index_k=index, l1_err=l1_err)


def _classify(l1, y_kind: YScale) -> SecondOrderClass:
    if abs(l1) < L1_ZERO_THRESHOLD:
        return SecondOrderClass.K0_TAU if y_kind.kind == "log" else SecondOrderClass.K0_ZETA
    if 0.0 < l1 <= 1.0 + 1e-12:
        return SecondOrderClass.K01_ZETA if y_kind.kind == "power" else SecondOrderClass.K01_TAU
    return SecondOrderClass.UNCLASSIFIED


def second_order_limit(spec: KaramataSpec, y_kind: YScale,
                       limits: Optional[KaramataLimits] = None) -> float:
    """Limit of ((K/K')' - l1) / y(t) at 0+ (with the l1 term dropped when l1 = 0).

    Raises WrongScaleError when the ratio grows without bound, which means
    y decays faster than the derivative ratio approaches l1.
    """
    if limits is None:
        limits = estimate_limits(spec)
    l1 = spec.l1_exact if spec.l1_exact is not None else limits.l1
    shift = 0.0 if abs(l1) < L1_ZERO_THRESHOLD else l1
    grid = [t for t in _SECOND_ORDER_GRID if t < spec.nu]
    samples = [(_ratio_prime(spec, t) - shift) / y_kind(t) for t in grid]

    finite = [abs(s) for s in samples if math.isfinite(s)]
    if len(finite) >= 4 and finite[-1] > 50.0 * max(finite[0], 1e-30) \
            and finite[-1] > finite[-2] > finite[-3]:
        raise WrongScaleError(
            f"{spec.label}: second-order ratio diverges against {y_kind.kind} scale")
    if y_kind.kind == "log":
        # the approach carries 1/ln corrections on a log scale
        xs = [1.0 / (-math.log(t)) for t in grid]
        value, _ = limit_estimate_slow(samples, xs, rel_tol=5e-3,
                                       context=f"{spec.label}: second-order limit")
    else:
        # strong scales amplify quadrature noise at the small end; cut there
        samples = truncate_noise_tail(samples)
        value, _ = limit_estimate(samples, rel_tol=5e-3, sweeps=2, abs_tol=1e-5,
                                  context=f"{spec.label}: second-order limit")
    return value


def full_limits(spec: KaramataSpec, y_kind: Optional[YScale] = None) -> KaramataLimits:
    """estimate_limits plus, when a scale is given, the second-order classification."""
    limits = estimate_limits(spec)
    if y_kind is not None:
        value = second_order_limit(spec, y_kind, limits)
        limits = replace(limits, second_order_value=value,
                         second_order_class=_classify(limits.l1, y_kind),
                         y_kind=y_kind)
    return limits


def dual_limit_check(spec: KaramataSpec, l1: Optional[float] = None) -> float:
    """|lim K (K')' / (K')^2 - (1 - l1)|: a self-consistency residual.

    The limit identity pairs with the definition of l1; the residual should
    vanish as the grid refines for every member of the class.
    """
    if l1 is None:
        l1 = spec.l1_exact if spec.l1_exact is not None else estimate_limits(spec).l1
    grid = [t for t in _LIMIT_GRID if t < spec.nu]
    samples = []
    for t in grid:
        kkp = spec.kk(t)
        samples.append(big_k(spec, t) * spec.kk_prime(t) / (kkp * kkp))
    value, _ = limit_estimate(samples, rel_tol=1e-3, context=f"{spec.label}: dual limit")
    return abs(value - (1.0 - l1))
