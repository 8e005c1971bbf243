"""The decreasing profile map phi defined by  integral_phi(t)^infty (qF)^(-1/p) = t.

phi(t) carries the blow-up shape: solutions behave like xi0 * phi(K(d))
near the boundary. q is the conjugate exponent p/(p-1) throughout; the
absorption power from the one-dimensional rate section is a different
quantity and is called power_q elsewhere in the package.

phi is computed by bracketed monotone root-finding on its defining tail
integral (closed form for pure powers, doubling quadrature otherwise);
an interpolation cache on a log grid serves bulk evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DivergentIntegralError, OutOfRangeError
from .extrapolation import limit_estimate
from .nonlinearity import NonlinearitySpec, big_f, conjugate, ko_tail

CACHE_T_MIN = 1e-8
CACHE_T_MAX = 10.0
CACHE_NODES = 400


def phi_p(z, p):
    """The p-Laplacian flux map |z|^(p-2) z."""
    return np.sign(z) * np.abs(z) ** (p - 1.0)


def phi_p_inv(z, p):
    """Inverse flux map sgn(z) |z|^(1/(p-1)); exact, no regularization."""
    return np.sign(z) * np.abs(z) ** (1.0 / (p - 1.0))


@dataclass
class PhiTransform:
    nonlinearity: NonlinearitySpec
    p: float = 2.0
    _cache: Optional[PchipInterpolator] = field(default=None, repr=False)

    def __post_init__(self):
        if self.p <= 1.0:
            raise DivergentIntegralError("p must exceed 1")
        if (self.nonlinearity.sigma + 2.0) / self.p <= 1.0:
            raise DivergentIntegralError(
                "growth condition fails (sigma + 2 <= p); the profile map is undefined")

    @property
    def q(self) -> float:
        return conjugate(self.p)

    @property
    def decay(self) -> float:
        """Boundary exponent: phi(t) ~ t^(-p/(sigma+2-p)) for power-like f."""
        return self.p / (self.nonlinearity.sigma + 2.0 - self.p)

    # -- defining integral and its inverse ---------------------------------

    def phi_inverse(self, u: float) -> float:
        """integral_u^infty (q F(s))^(-1/p) ds."""
        if u <= 0:
            raise OutOfRangeError("phi_inverse is defined for positive arguments")
        return ko_tail(self.nonlinearity, self.p, u)

    def phi(self, t: float) -> float:
        """Invert the tail integral: the unique u with phi_inverse(u) = t."""
        if t <= 0:
            raise OutOfRangeError("phi is defined for positive t")
        sigma = self.nonlinearity.sigma
        s = (sigma + 2.0 - self.p) / self.p
        # power-law guess, then expand to a safe bracket in log u; the
        # bracket is validated through the same exp() path brentq will use
        guess = max((self.phi_inverse(1.0) / t) ** (1.0 / s), 1e-250)

        def fun(x):
            return self.phi_inverse(math.exp(x)) - t

        ln2 = math.log(2.0)
        la = lb = math.log(guess)
        for _ in range(1000):
            if fun(la) > 0.0:
                break
            la -= ln2
            if la < -650.0:
                raise OutOfRangeError(f"t={t} exceeds the range of the profile map")
        for _ in range(1000):
            if fun(lb) < 0.0:
                break
            lb += ln2
            if lb > 650.0:
                raise OutOfRangeError(f"t={t} below the range of the profile map")
        lu = brentq(fun, la, lb, xtol=1e-14, rtol=1e-15)
        return math.exp(lu)

    # -- cached bulk evaluation --------------------------------------------

    def _build_cache(self):
        ts = np.geomspace(CACHE_T_MIN, CACHE_T_MAX, CACHE_NODES)
        # invert once per node; in log-log the table is near-linear, so the
        # monotone cubic between nodes is essentially exact for power-like f
        us = np.array([self.phi(t) for t in ts])
        self._cache = PchipInterpolator(np.log(ts), np.log(us), extrapolate=True)

    def phi_cached(self, t):
        """Vectorized phi through the log-log interpolation table."""
        if self._cache is None:
            self._build_cache()
        return np.exp(self._cache(np.log(np.asarray(t, dtype=float))))

    def cache_table(self):
        """(t, phi(t)) rows of the cache grid, for CSV dumps."""
        if self._cache is None:
            self._build_cache()
        ts = np.exp(self._cache.x)
        return np.column_stack([ts, np.exp(self._cache(self._cache.x))])

    # -- derivative identities ----------------------------------------------

    def phi_deriv_fd(self, t: float, rel_step: float = 1e-5) -> float:
        h = t * rel_step
        return (self.phi(t + h) - self.phi(t - h)) / (2.0 * h)

    def phi_deriv2_fd(self, t: float, rel_step: float = 5e-3) -> float:
        # Richardson pair of centered second differences; the larger base
        # step keeps quadrature noise (relative ~1e-12) out of the result
        def second(h):
            return (self.phi(t + h) - 2.0 * self.phi(t) + self.phi(t - h)) / (h * h)

        h = t * rel_step
        d1, d2 = second(h), second(0.5 * h)
        return (4.0 * d2 - d1) / 3.0

    def identity_residuals(self, t: float) -> dict:
        """Relative defects of the two derivative identities of the profile map.

        r1 checks phi' = -(q F(phi))^(1/p); r2 checks
        |phi'|^(p-2) phi'' = (q/p) f(phi). Derivatives come from finite
        differences on the exact inversion, so both checks are independent
        of the identities themselves.
        """
        u = self.phi(t)
        d1 = self.phi_deriv_fd(t)
        rhs1 = (self.q * big_f(self.nonlinearity, u)) ** (1.0 / self.p)
        r1 = abs(d1 + rhs1) / abs(d1)

        d2 = self.phi_deriv2_fd(t)
        lhs2 = abs(d1) ** (self.p - 2.0) * d2
        rhs2 = (self.q / self.p) * float(self.nonlinearity.f(u))
        r2 = abs(lhs2 - rhs2) / abs(rhs2)
        return {"r1": r1, "r2": r2}

    def nrvz_index(self) -> float:
        """Extrapolated limit of t phi'(t)/phi(t) at 0+; target -p/(sigma+2-p)."""
        grid = [10.0 ** (-1 - 0.5 * j) for j in range(11)]
        samples = [t * self.phi_deriv_fd(t) / self.phi(t) for t in grid]
        value, _ = limit_estimate(samples, rel_tol=1e-4, context="phi variation index")
        return value

    def flux_ratio_limit(self) -> dict:
        """Extrapolated limit of Phi_p(phi'(t)) / (t f(phi(t))) at 0+.

        Closed-form target: -(q/p) (sigma+2-p)/(2+sigma).
        """
        grid = [10.0 ** (-1 - 0.5 * j) for j in range(9)]
        samples = []
        for t in grid:
            d1 = self.phi_deriv_fd(t)
            samples.append(float(phi_p(d1, self.p)) / (t * float(self.nonlinearity.f(self.phi(t)))))
        value, _ = limit_estimate(samples, rel_tol=1e-3, context="flux ratio limit")
        sigma = self.nonlinearity.sigma
        target = -(self.q / self.p) * (sigma + 2.0 - self.p) / (2.0 + sigma)
        return {"value": value, "target": target}


def power_phi_constant(sigma: float, p: float) -> float:
    """Closed-form prefactor for pure powers: phi_inverse(u) = C u^(-(sigma+2-p)/p)."""
    q = conjugate(p)
    return (p / (sigma + 2.0 - p)) * ((sigma + 2.0) / q) ** (1.0 / p)
