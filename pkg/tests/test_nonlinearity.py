"""Absorption terms: primitive, growth classification, ratio limits."""

import math

import numpy as np
import pytest

from blowuplab.errors import DivergentIntegralError, NonConvergentError
from blowuplab.nonlinearity import (NonlinearitySpec, big_f, keller_osserman,
                                    ko_tail, power_nonlinearity, ratio_limits,
                                    rv_index, tail_integral)


def oscillating_spec():
    return NonlinearitySpec(
        sigma=2.0, slow_name="custom",
        slow=lambda u: 2.0 + np.sin(np.log(np.log(u))),
        slow_prime=lambda u: np.cos(np.log(np.log(u))) / (u * np.log(u)))


class TestBigF:
    def test_cubic(self):
        assert big_f(power_nonlinearity(3.0), 2.0) == pytest.approx(4.0, rel=1e-12)

    def test_quadratic(self):
        assert big_f(power_nonlinearity(2.0), 1.0) == pytest.approx(1 / 3, rel=1e-12)

    def test_cubic_log_factor_series_oracle(self):
        # integral_0^1 u^3 ln(1+u) du expanded term by term:
        # sum (-1)^(m+1) / (m (m+4)) = 7/48
        partial = sum((-1) ** (m + 1) / (m * (m + 4)) for m in range(1, 5000))
        assert partial == pytest.approx(7 / 48, abs=1e-6)
        spec = NonlinearitySpec(sigma=2.0, slow_name="log1p")
        assert big_f(spec, 1.0) == pytest.approx(7 / 48, rel=1e-10)

    @pytest.mark.parametrize("q,t", [(1.5, 0.3), (3.0, 2.0), (4.5, 7.0)])
    def test_pure_power_homogeneity(self, q, t):
        assert big_f(power_nonlinearity(q), t) == pytest.approx(
            t ** (q + 1) / (q + 1), rel=1e-12)

    def test_monotone(self):
        spec = NonlinearitySpec(sigma=1.0, slow_name="loglog")
        vals = [big_f(spec, t) for t in (0.5, 1.0, 2.0, 4.0)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestKellerOsserman:
    def test_cubic_convergent_with_value(self):
        v = keller_osserman(power_nonlinearity(3.0), 2.0)
        assert v.status == "convergent" and v.convergent is True
        # integral_1^inf (t^4/2)^(-1/2) dt = sqrt(2)
        assert v.integral_value == pytest.approx(math.sqrt(2), abs=1e-8)

    def test_linear_divergent(self):
        # tail exponent exactly 1: logarithmic divergence, decidable for
        # exact powers
        v = keller_osserman(power_nonlinearity(1.0), 2.0)
        assert v.status == "divergent" and v.convergent is False
        assert math.isinf(v.integral_value)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("q", [0.5 * j for j in range(1, 11)])
    def test_classification_grid(self, p, q):
        v = keller_osserman(power_nonlinearity(q), p)
        assert (v.convergent is True) == (q > p - 1.0)

    def test_critical_with_slow_factor_is_inconclusive(self):
        spec = NonlinearitySpec(sigma=0.0, slow_name="log1p")
        v = keller_osserman(spec, 2.0)
        assert v.status == "inconclusive" and v.convergent is None

    def test_tail_integral_divergence_guard(self):
        with pytest.raises(DivergentIntegralError):
            tail_integral(lambda z: 1.0 / np.asarray(z), 1.0)


class TestRVIndex:
    def test_pure_power(self):
        assert rv_index(power_nonlinearity(3.0)) == pytest.approx(3.0, abs=1e-10)

    def test_log_factor_drops(self):
        spec = NonlinearitySpec(sigma=1.0, slow_name="log1p")
        assert rv_index(spec) == pytest.approx(2.0, abs=1e-3)

    @pytest.mark.parametrize("slow,sigma", [("loglog", 1.5), ("explog:0.5", 2.0)])
    def test_other_slow_factors(self, slow, sigma):
        spec = NonlinearitySpec(sigma=sigma, slow_name=slow)
        assert rv_index(spec) == pytest.approx(sigma + 1.0, abs=1e-3)

    def test_oscillating_factor_flagged(self):
        # direct evaluation oscillates: t f'/f swings with cos(ln ln t)/ln t
        spec = oscillating_spec()
        samples = [float(t * spec.f_prime(t) / spec.f(t)) for t in
                   (1e4, 1e7, 1e10, 1e13, 1e16)]
        assert max(samples) - min(samples) > 1e-3  # visibly oscillating
        with pytest.raises(NonConvergentError):
            rv_index(spec)


class TestRatioLimits:
    def test_sigma2_p2(self):
        out = ratio_limits(power_nonlinearity(3.0), 2.0)
        assert out["lim_F_over_zf"] == pytest.approx(0.25, abs=1e-4)
        assert out["lim_F_over_zf_target"] == 0.25
        assert out["lim_keller_ratio"] == pytest.approx(0.25, abs=1e-4)
        assert out["lim_keller_ratio_target"] == 0.25

    def test_sigma3_p3(self):
        out = ratio_limits(power_nonlinearity(4.0), 3.0)
        assert out["lim_keller_ratio"] == pytest.approx(2 / 15, abs=1e-4)

    @pytest.mark.parametrize("q,p", [(2.5, 2.0), (4.0, 2.0), (5.0, 3.0)])
    def test_pure_power_targets(self, q, p):
        sigma = q - 1.0
        out = ratio_limits(power_nonlinearity(q), p)
        assert out["lim_F_over_zf"] == pytest.approx(1 / (2 + sigma), abs=1e-4)
        assert out["lim_keller_ratio"] == pytest.approx(
            (sigma + 2 - p) / (p * (2 + sigma)), abs=1e-4)


class TestScalingProperty:
    @pytest.mark.parametrize("xi", [0.5, 2.0, 5.0])
    def test_pure_power_ratio(self, xi):
        spec = power_nonlinearity(3.0)
        u = 1e8
        assert float(spec.f(xi * u) / spec.f(u)) == pytest.approx(
            xi ** 3, rel=1e-4)

    def test_slow_factor_ratio_improves_with_u(self):
        spec = NonlinearitySpec(sigma=1.0, slow_name="log1p")
        xi = 2.0
        devs = [abs(float(spec.f(xi * u) / spec.f(u)) - xi ** 2)
                for u in (1e4, 1e8, 1e12)]
        assert devs[0] > devs[1] > devs[2]


class TestKoTail:
    def test_closed_form_power(self):
        # p=2, f=u^3: integral_u^inf (2F)^(-1/2) = sqrt(2)/u
        spec = power_nonlinearity(3.0)
        assert ko_tail(spec, 2.0, 2.0) == pytest.approx(math.sqrt(2) / 2, rel=1e-12)

    def test_quadrature_route_agrees(self):
        from scipy.integrate import quad
        spec = power_nonlinearity(4.0)
        p = 3.0
        direct, _ = quad(lambda s: (1.5 * s ** 5 / 5.0) ** (-1 / 3), 2.0, 1e4,
                         epsabs=0.0, epsrel=1e-12, limit=400)
        # analytic remainder of the pure-power tail beyond the cutoff
        e = 5.0 / 3.0
        rem = (1.5 / 5.0) ** (-1 / 3) * (1e4) ** (1 - e) / (e - 1)
        assert ko_tail(spec, p, 2.0) == pytest.approx(direct + rem, rel=1e-8)

    def test_divergent_raises(self):
        with pytest.raises(DivergentIntegralError):
            ko_tail(power_nonlinearity(1.0), 2.0, 1.0)
