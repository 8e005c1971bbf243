"""The profile map phi: inversion, identities, variation indices."""

import math

import numpy as np
import pytest

from blowuplab.errors import DivergentIntegralError, OutOfRangeError
from blowuplab.extrapolation import aitken
from blowuplab.nonlinearity import power_nonlinearity
from blowuplab.transform import PhiTransform, phi_p, phi_p_inv, power_phi_constant

# closed-form anchor: p = 3, f = u^4 gives phi_inverse(u) = C u^(-2/3)
C_P3_S3 = 2.2407023732785824


@pytest.fixture(scope="module")
def cubic():
    return PhiTransform(power_nonlinearity(3.0), p=2.0)


@pytest.fixture(scope="module")
def quartic_p3():
    return PhiTransform(power_nonlinearity(4.0), p=3.0)


class TestPhiInverse:
    def test_cubic_closed_form(self, cubic):
        assert cubic.phi_inverse(2.0) == pytest.approx(math.sqrt(2) / 2, rel=1e-10)
        assert cubic.phi_inverse(math.sqrt(2)) == pytest.approx(1.0, rel=1e-10)

    def test_p3_closed_form(self, quartic_p3):
        assert power_phi_constant(3.0, 3.0) == pytest.approx(C_P3_S3, rel=1e-12)
        for u in (0.5, 1.0, 7.0):
            assert quartic_p3.phi_inverse(u) == pytest.approx(
                C_P3_S3 * u ** (-2 / 3), rel=1e-10)

    def test_rejects_nonpositive(self, cubic):
        with pytest.raises(OutOfRangeError):
            cubic.phi_inverse(0.0)

    def test_needs_growth_condition(self):
        with pytest.raises(DivergentIntegralError):
            PhiTransform(power_nonlinearity(1.0), p=2.0)


class TestPhi:
    def test_cubic_values(self, cubic):
        assert cubic.phi(1.0) == pytest.approx(math.sqrt(2), rel=1e-9)
        assert cubic.phi(0.1) == pytest.approx(14.142135623730951, rel=1e-9)

    @pytest.mark.parametrize("p,q", [(2.0, 3.0), (3.0, 4.0), (2.5, 3.2)])
    def test_power_closed_form_equivalence(self, p, q):
        sigma = q - 1.0
        tr = PhiTransform(power_nonlinearity(q), p=p)
        C = power_phi_constant(sigma, p)
        expo = p / (sigma + 2.0 - p)
        for t in np.geomspace(1e-6, 1.0, 7):
            closed = (C / t) ** expo
            assert tr.phi(t) == pytest.approx(closed, rel=1e-8)

    def test_monotone_decreasing(self, cubic):
        ts = np.geomspace(1e-6, 5.0, 30)
        vals = [cubic.phi(t) for t in ts]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_round_trip(self, cubic):
        for t in np.geomspace(1e-6, 1.0, 9):
            assert cubic.phi_inverse(cubic.phi(t)) == pytest.approx(t, rel=1e-8)

    def test_cached_matches_exact(self, cubic):
        ts = np.geomspace(2e-8, 8.0, 41)  # off-node points
        exact = np.array([cubic.phi(t) for t in ts])
        assert np.max(np.abs(cubic.phi_cached(ts) / exact - 1.0)) < 1e-8


class TestIdentities:
    def test_first_identity_residual(self, cubic):
        assert cubic.identity_residuals(1.0)["r1"] < 1e-6

    def test_second_identity_residual(self, cubic):
        assert cubic.identity_residuals(0.01)["r2"] < 1e-5

    def test_residuals_nonnegative(self, quartic_p3):
        res = quartic_p3.identity_residuals(0.3)
        assert res["r1"] >= 0 and res["r2"] >= 0

    @pytest.mark.parametrize("t", np.geomspace(1e-6, 1.0, 7))
    def test_residual_grid(self, cubic, t):
        res = cubic.identity_residuals(float(t))
        assert res["r1"] < 1e-5
        assert res["r2"] < 1e-5


class TestVariationIndex:
    def test_semilinear_sigma2(self, cubic):
        assert cubic.nrvz_index() == pytest.approx(-1.0, abs=1e-3)

    def test_semilinear_sigma4(self):
        tr = PhiTransform(power_nonlinearity(5.0), p=2.0)
        assert tr.nrvz_index() == pytest.approx(-0.5, abs=1e-3)

    def test_p3_sigma3(self, quartic_p3):
        assert quartic_p3.nrvz_index() == pytest.approx(-1.5, abs=1e-3)


class TestFluxRatio:
    @pytest.mark.parametrize("p,q", [(2.0, 3.0), (3.0, 4.0), (2.5, 2.7)])
    def test_limit_matches_target(self, p, q):
        tr = PhiTransform(power_nonlinearity(q), p=p)
        out = tr.flux_ratio_limit()
        assert out["value"] == pytest.approx(out["target"], abs=1e-3)


class TestSemilinearRatios:
    """phi'/(t phi'') and phi/(t^2 phi'') limits for p = 2."""

    @pytest.mark.parametrize("sigma", [2.0, 4.0])
    def test_ratio_limits(self, sigma):
        tr = PhiTransform(power_nonlinearity(sigma + 1.0), p=2.0)
        grid = [10.0 ** (-1 - 0.5 * j) for j in range(8)]
        first, second = [], []
        for t in grid:
            d1 = tr.phi_deriv_fd(t)
            d2 = tr.phi_deriv2_fd(t)
            first.append(d1 / (t * d2))
            second.append(tr.phi(t) / (t * t * d2))
        lim1 = aitken(first, sweeps=2)[-1]
        lim2 = aitken(second, sweeps=2)[-1]
        assert lim1 == pytest.approx(-sigma / (sigma + 2.0), abs=1e-3)
        assert lim2 == pytest.approx(sigma ** 2 / (2 * (sigma + 2.0)), abs=1e-3)


class TestPMaps:
    def test_flux_map_roundtrip(self):
        for p in (1.5, 2.0, 3.0):
            for z in (-2.0, -0.3, 0.7, 5.0):
                assert phi_p_inv(phi_p(z, p), p) == pytest.approx(z, rel=1e-12)

    def test_degenerate_at_zero(self):
        assert phi_p(0.0, 3.0) == 0.0
        assert phi_p_inv(0.0, 1.5) == 0.0

    def test_cache_table_shape(self, cubic):
        table = cubic.cache_table()
        assert table.shape[1] == 2
        assert np.all(np.diff(table[:, 0]) > 0)
        assert np.all(np.diff(table[:, 1]) < 0)
