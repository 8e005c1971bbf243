"""Shooting solver: oracles, sandwich bounds, Dirichlet scaffold, ordering."""

import math

import numpy as np
import pytest

from blowuplab.errors import BracketingError, DomainError
from blowuplab.nonlinearity import NonlinearitySpec
from blowuplab.radial import (CoefficientPower, RadialProblem, blow_up_radius,
                              blowup_profile, boundary_exponent,
                              comparison_check, graded_nodes, ko_envelope,
                              large_solution, radius_integral, resample,
                              sandwich_bounds, shoot, shoot_interval,
                              solve_dirichlet)

# blow-up radius of the symmetric one-dimensional shot with unit start value
# (f = u^3, p = 2): sqrt(2) * integral_1^inf dz / sqrt(z^4 - 1)
R1_STAR = 1.8540746773013719


def cubic_ball(N=1, weight="const", alpha=0.0, scale=1.0):
    return RadialProblem(dimension=N, radius=1.0, p=2.0, alpha=alpha,
                         weight_kind=weight, b=CoefficientPower(scale),
                         nonlinearity=3.0, geometry="ball")


def cubic_interval(alpha=0.0, scale=1.0, gamma=0.0, B0=0.0, theta=1.0, q=3.0, p=2.0):
    kind = "const" if alpha == 0.0 else "distance"
    return RadialProblem(dimension=1, radius=1.0, p=p, alpha=alpha,
                         weight_kind=kind,
                         b=CoefficientPower(scale, gamma, B0, theta),
                         nonlinearity=q, geometry="interval")


def rk4_oracle(psi0, r_max, n=400_000):
    """Fixed-step fourth-order integration of u'' = u^3, u(0)=psi0, u'(0)=0.

    Deliberately brute force and independent of the production integrator.
    """
    h = r_max / n
    u, v = psi0, 0.0
    rs = [0.0]
    us = [psi0]
    for i in range(n):
        def f(state):
            uu, vv = state
            return vv, uu ** 3

        k1 = f((u, v))
        k2 = f((u + 0.5 * h * k1[0], v + 0.5 * h * k1[1]))
        k3 = f((u + 0.5 * h * k2[0], v + 0.5 * h * k2[1]))
        k4 = f((u + h * k3[0], v + h * k3[1]))
        u += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        rs.append((i + 1) * h)
        us.append(u)
    return np.array(rs), np.array(us)


class TestShoot:
    def test_matches_brute_force_oracle(self):
        prob = cubic_ball(N=1)
        res = shoot(prob, 1.0, r_end=1.5)
        rs, us = rk4_oracle(1.0, 1.5)
        ours = resample(res.profile, rs[::40_000][1:])
        theirs = us[::40_000][1:]
        assert np.max(np.abs(ours / theirs - 1.0)) < 1e-6

    def test_zero_start_is_zero(self):
        res = shoot(cubic_ball(N=2), 0.0)
        assert res.blow_up_radius is None
        assert np.all(res.profile.values == 0.0)

    def test_blow_up_radius_scaling(self):
        # u -> lam u(lam r) maps solutions to solutions for f = u^3, p = 2,
        # so the blow-up radius scales like 1/psi0
        prob = cubic_ball(N=1)
        r1 = blow_up_radius(prob, 1.0)
        r4 = blow_up_radius(prob, 4.0)
        assert r1 == pytest.approx(R1_STAR, rel=1e-7)
        assert 4.0 * r4 == pytest.approx(r1, rel=1e-7)

    def test_dimension_one_radius_equals_integral(self):
        # at N = 1 the sandwich collapses to equality
        prob = cubic_ball(N=1)
        for psi0 in (0.5, 1.0, 3.0):
            assert blow_up_radius(prob, psi0) == pytest.approx(
                radius_integral(prob, psi0), rel=1e-6)

    def test_resolved_profile_residual(self):
        res = shoot(cubic_ball(N=2), 2.0)
        assert res.profile.meta["residual_norm"] < 2e-9

    def test_negative_start_rejected(self):
        with pytest.raises(DomainError):
            shoot(cubic_ball(), -1.0)


class TestSandwich:
    @pytest.mark.parametrize("N", [2, 3])
    def test_bounds_bracket_radius(self, N):
        prob = cubic_ball(N=N)
        for psi0 in (0.5, 1.0, 2.0, 4.0, 8.0):
            out = sandwich_bounds(prob, psi0)
            assert out["lower"] <= out["measured"] <= out["upper"]

    def test_radius_monotone_nonincreasing(self):
        prob = cubic_ball(N=2)
        radii = [blow_up_radius(prob, s) for s in (0.5, 1.0, 2.0, 4.0, 8.0)]
        assert all(a > b for a, b in zip(radii, radii[1:]))


class TestEnvelope:
    def test_dimension_one_closed_form(self):
        # R~(psi0) = R1_STAR / psi0, so the envelope at s is R1_STAR / s
        prob = cubic_ball(N=1)
        for s in (0.25, 0.5, 1.0):
            env = ko_envelope(prob, s)
            assert env == pytest.approx(R1_STAR / s, rel=1e-6)
            assert env >= math.sqrt(2) / s  # above the one-sided family

    def test_decreasing_and_blowing_up(self):
        prob = cubic_ball(N=2)
        e1, e2, e3 = (ko_envelope(prob, s) for s in (0.1, 0.3, 0.9))
        assert e1 > e2 > e3

    def test_distance_weight_rejected(self):
        with pytest.raises(DomainError):
            ko_envelope(cubic_ball(weight="distance", alpha=0.5), 0.5)

    def test_unattainable_radius(self):
        with pytest.raises(BracketingError):
            ko_envelope(cubic_ball(N=2), -1.0)


class TestDirichlet:
    def test_zero_boundary_value(self):
        prof = solve_dirichlet(cubic_ball(N=2), 0.0)
        assert np.all(prof.values == 0.0)

    def test_monotone_in_boundary_value(self):
        prob = cubic_ball(N=2)
        nodes = np.linspace(0.05, 0.9, 12)
        prev = None
        for k in (1.0, 2.0, 4.0, 8.0):
            vals = resample(solve_dirichlet(prob, k), nodes)
            if prev is not None:
                assert np.all(vals >= prev - 1e-10 * np.abs(vals))
            prev = vals

    def test_bounded_by_envelope(self):
        prob = cubic_ball(N=2)
        prof = solve_dirichlet(prob, 8.0)
        for r in (0.2, 0.5, 0.8):
            assert float(resample(prof, [r])[0]) <= ko_envelope(prob, 1.0 - r) * (1 + 1e-8)

    def test_boundary_value_hit(self):
        prof = solve_dirichlet(cubic_interval(), 16.0)
        assert prof.meta["boundary_gap"] < 1e-9
        assert prof.meta["residual_norm"] < 2e-9


class TestLargeSolution:
    def test_exact_cubic_interval(self):
        prof = large_solution(cubic_interval())
        d = prof.distances()
        sel = (d >= 1e-3) & (d <= 1e-1)
        rel = prof.values[sel] * d[sel] / math.sqrt(2) - 1.0
        assert np.max(np.abs(rel)) < 5e-3
        assert prof.meta["monotone_violation"] < 1e-8

    def test_schedule_independence(self):
        prob = cubic_interval()
        a = large_solution(prob, [2.0 ** j for j in range(17)])
        b = large_solution(prob, [3.0 ** j for j in range(11)])
        nodes = np.linspace(0.1, 0.5, 6)
        va, vb = resample(a, nodes), resample(b, nodes)
        assert np.max(np.abs(va / vb - 1.0)) < 1e-6

    def test_ordering_against_larger_coefficient(self):
        u = large_solution(cubic_interval(scale=1.0))
        u_tilde = large_solution(cubic_interval(scale=4.0))
        out = comparison_check(u_tilde, u)
        assert out["ordered"]


class TestBlowupProfile:
    def test_sharp_cubic_interval(self):
        prof = blowup_profile(cubic_interval())
        d = prof.distances()
        sel = (d >= 1e-6) & (d <= 1e-2)
        rel = prof.values[sel] * d[sel] / math.sqrt(2) - 1.0
        assert np.max(np.abs(rel)) < 1e-6
        assert prof.meta["blow_up"] is True

    def test_agrees_with_schedule_route(self):
        # the weighted problem saturates more slowly in k; the schedule
        # route is the construction, the sharp route the precision tool
        prob = cubic_interval(alpha=0.5)
        sharp = blowup_profile(prob)
        sched = large_solution(prob, interior_tol=1e-7)
        nodes = np.linspace(0.2, 0.8, 5)
        assert np.max(np.abs(resample(sharp, nodes) / resample(sched, nodes) - 1.0)) < 1e-5

    def test_boundary_exponent(self):
        assert boundary_exponent(cubic_interval(alpha=0.5)) == pytest.approx(0.75)
        assert boundary_exponent(cubic_interval(gamma=1.0)) == pytest.approx(1.5)

    def test_solver_tolerance_refinement(self):
        # interior values converge as the tolerance tightens (adaptive
        # stepping replaces grid grading; refinement is tolerance-driven)
        prob = cubic_interval(gamma=1.0)
        ref = blowup_profile(prob, rtol=1e-13)
        nodes = np.linspace(0.3, 0.9, 5)
        vref = resample(ref, nodes)
        errs = []
        for rtol in (1e-7, 1e-9, 1e-11):
            v = resample(blowup_profile(prob, rtol=rtol), nodes)
            errs.append(np.max(np.abs(v / vref - 1.0)))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 3e-9


class TestComparison:
    def test_identical(self):
        prof = solve_dirichlet(cubic_ball(N=2), 2.0)
        out = comparison_check(prof, prof)
        assert out["ordered"] and out["max_violation"] == 0.0

    def test_swapped_arguments_flagged(self):
        prob = cubic_ball(N=2)
        small = solve_dirichlet(prob, 1.0)
        big = solve_dirichlet(prob, 4.0)
        assert comparison_check(small, big)["ordered"]
        swapped = comparison_check(big, small)
        assert not swapped["ordered"]
        assert swapped["max_violation"] > 0.0


class TestIntervalGeometry:
    def test_zero_slope_is_zero(self):
        res = shoot_interval(cubic_interval(), 0.0)
        assert res.blow_up_radius is None

    def test_first_integral_positive_derivative(self):
        res = shoot_interval(cubic_interval(), 2.0)
        assert np.all(res.profile.derivs >= 0.0)

    def test_graded_nodes_shape(self):
        nodes = graded_nodes(1.0)
        assert nodes[0] == pytest.approx(0.1)
        assert 1.0 - nodes[-1] <= 1e-8
        assert np.all(np.diff(nodes) > 0)


class TestGenericCallables:
    def test_custom_coefficient_matches_parametric(self):
        para = cubic_interval(gamma=1.0)
        custom = RadialProblem(dimension=1, radius=1.0, p=2.0, alpha=0.0,
                               weight_kind="const",
                               b=lambda r: (1.0 - r),
                               nonlinearity=NonlinearitySpec(sigma=2.0),
                               geometry="interval")
        k = 64.0
        a = solve_dirichlet(para, k)
        b = solve_dirichlet(custom, k)
        nodes = np.linspace(0.2, 0.9, 5)
        assert np.max(np.abs(resample(a, nodes) / resample(b, nodes) - 1.0)) < 1e-8
