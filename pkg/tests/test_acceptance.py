"""Acceptance criteria A1-A12: the exit gate of the build.

Each test prints one `[A#] PASS/FAIL` line with the measured numbers at
the criterion's stated tolerance. Shared expensive solves are module-
scoped fixtures. Runtime budgets are asserted only for the compiled
kernel backend; the pure-Python fallback computes the same numbers more
slowly.
"""

import math
import time

import numpy as np
import pytest

from blowuplab import _kernels as kern
from blowuplab.asymptotics import (exponent_consistency, predict_1d,
                                   predict_chi, predict_first_order,
                                   ITermConfig, extrapolate_I_limits)
from blowuplab.karamata import (dual_limit_check, estimate_limits,
                                expm1_power_weight, log1p_power_weight,
                                power_weight, y_power)
from blowuplab.nonlinearity import keller_osserman, power_nonlinearity
from blowuplab.radial import (CoefficientPower, RadialProblem, blowup_profile,
                              comparison_check, ko_envelope, large_solution,
                              resample, sandwich_bounds, solve_dirichlet)
from blowuplab.ratefit import (adjudicate_variant, decomposition_weight,
                               first_order_ratio, fit_power,
                               second_order_correction)
from blowuplab.transform import PhiTransform


def report(name, ok, detail=""):
    print(f"[{name}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{name}: {detail}"


def interval_problem(p=2.0, alpha=0.0, q=3.0, scale=1.0, gamma=0.0,
                     B0=0.0, theta=1.0):
    kind = "const" if alpha == 0.0 else "distance"
    return RadialProblem(dimension=1, radius=1.0, p=p, alpha=alpha,
                         weight_kind=kind,
                         b=CoefficientPower(scale, gamma, B0, theta),
                         nonlinearity=q, geometry="interval")


GRID = [(p, alpha) for p in (2.0, 3.0) for alpha in (-0.5, 0.0, 0.5)]


@pytest.fixture(scope="module")
def grid_profiles():
    """Sharp large solutions over the A2/A3 grid, with wall time."""
    out = {}
    t0 = time.perf_counter()
    for p, alpha in GRID:
        out[(p, alpha)] = blowup_profile(interval_problem(p=p, alpha=alpha,
                                                          q=p + 1.0))
    out["elapsed"] = time.perf_counter() - t0
    return out


def test_a1_exact_solution_reproduction():
    """A1: Dirichlet-schedule large solution vs sqrt(2)/d within 0.5%."""
    t0 = time.perf_counter()
    prof = large_solution(interval_problem())
    elapsed = time.perf_counter() - t0
    d = prof.distances()
    sel = (d >= 1e-3) & (d <= 1e-1)
    rel = np.abs(prof.values[sel] * d[sel] / math.sqrt(2.0) - 1.0)
    ok = np.max(rel) < 5e-3
    if kern.HAVE_EXTENSION:
        ok = ok and elapsed < 10.0
    report("A1", ok, f"max rel dev {np.max(rel):.2e} on d in [1e-3,1e-1], "
                     f"{elapsed:.2f}s")


def test_a2_exponent_grid(grid_profiles):
    """A2: fitted boundary exponents within 2% over the (p, alpha) grid."""
    worst = 0.0
    for p, alpha in GRID:
        fit = fit_power(grid_profiles[(p, alpha)], (1e-5, 1e-2))
        beta = predict_1d(p, alpha, p + 1.0)["beta"]
        worst = max(worst, abs(fit.beta_hat - beta) / beta)
    elapsed = grid_profiles["elapsed"]
    ok = worst < 0.02
    if kern.HAVE_EXTENSION:
        ok = ok and elapsed < 120.0
    report("A2", ok, f"worst exponent dev {worst:.2e}, grid solved in "
                     f"{elapsed:.1f}s")


def test_a3_constant_grid(grid_profiles):
    """A3: fitted boundary constants within 5% over the same grid."""
    worst = 0.0
    for p, alpha in GRID:
        fit = fit_power(grid_profiles[(p, alpha)], (1e-5, 1e-2))
        psi = predict_1d(p, alpha, p + 1.0)["psi_R"]
        worst = max(worst, abs(fit.C_hat - psi) / psi)
    report("A3", worst < 0.05, f"worst constant dev {worst:.2e}")


def test_a4_theorem_consistency_and_adjudication():
    """A4: exact exponent identity; numerator variant adjudicated."""
    for p, alpha in GRID:
        cons = exponent_consistency(p, alpha, p + 1.0)
        assert cons["identical"] is True
    fam = [interval_problem(p=p, q=p + 1.0) for p in (2.0, 2.5, 3.0)]
    rep = adjudicate_variant(fam)
    control = [r for r in rep["rows"] if r["variants_coincide"]]
    decided = rep["selected_variant"]
    ok = (len(control) == 1
          and control[0]["verdict"] == "inconclusive_by_design"
          and decided in ("theorem", "proof"))
    report("A4", ok, f"exponent identity exact on grid; p=2 control "
                     f"inconclusive-by-design; selected variant: {decided}")


def test_a5_keller_osserman_classifier():
    """A5: convergent iff q > p-1; the p=2, q=3 integral equals sqrt(2)."""
    ok = True
    for p in (1.5, 2.0, 3.0):
        for q in [0.5 * j for j in range(1, 11)]:
            v = keller_osserman(power_nonlinearity(q), p)
            ok = ok and ((v.convergent is True) == (q > p - 1.0))
    v23 = keller_osserman(power_nonlinearity(3.0), 2.0)
    gap = abs(v23.integral_value - math.sqrt(2.0))
    ok = ok and gap < 1e-8
    report("A5", ok, f"grid classified; value gap {gap:.2e}")


def test_a6_sandwich_bounds():
    """A6: I(psi0) <= R~(psi0) <= N^(1/p) I(psi0) for N in {2,3}."""
    worst = ""
    ok = True
    for N in (2, 3):
        prob = RadialProblem(dimension=N, radius=1.0, p=2.0, alpha=0.0,
                             weight_kind="const", b=CoefficientPower(1.0),
                             nonlinearity=3.0)
        for psi0 in (0.5, 1.0, 2.0, 4.0, 8.0):
            out = sandwich_bounds(prob, psi0)
            good = out["lower"] <= out["measured"] <= out["upper"]
            ok = ok and good
            if not good:
                worst = f"N={N} psi0={psi0}: {out}"
    report("A6", ok, worst or "10/10 bracketed")


def test_a7_monotone_scaffold_and_envelope():
    """A7: Dirichlet solutions nondecreasing in k and under the envelope."""
    prob = RadialProblem(dimension=2, radius=1.0, p=2.0, alpha=0.0,
                         weight_kind="const", b=CoefficientPower(1.0),
                         nonlinearity=3.0)
    nodes = np.linspace(0.05, 0.95, 13)
    profiles = []
    violation = 0.0
    for j in range(17):
        prof = solve_dirichlet(prob, float(2 ** j))
        vals = resample(prof, nodes)
        if profiles:
            violation = max(violation, float(np.max(
                (profiles[-1] - vals) / np.maximum(np.abs(vals), 1.0))))
        profiles.append(vals)
    env = np.array([ko_envelope(prob, 1.0 - r) for r in nodes])
    bounded = all(np.all(vals <= env * (1.0 + 1e-8)) for vals in profiles)
    ok = violation < 1e-8 and bounded
    report("A7", ok, f"max monotonicity violation {violation:.2e}; "
                     f"all 17 schedules under the envelope: {bounded}")


def test_a8_karamata_limits():
    """A8: l1 formula, l0 = 0, and the dual limit for the example weights."""
    cases = [
        (power_weight(1.0, 0.0), 1.0, 0.0),
        (log1p_power_weight(2.0, 0.0), 2.0, 0.0),
        (expm1_power_weight(2.0, 0.5), 2.0, 0.5),
    ]
    worst_l1 = worst_l0 = worst_dual = 0.0
    for spec, q, alpha in cases:
        lim = estimate_limits(spec)
        target = 1.0 / (1.0 + q - alpha / 2.0)
        worst_l1 = max(worst_l1, abs(lim.l1 - target))
        worst_l0 = max(worst_l0, abs(lim.l0))
        worst_dual = max(worst_dual, dual_limit_check(spec, l1=lim.l1))
    ok = worst_l1 < 1e-6 and worst_l0 < 1e-6 and worst_dual < 1e-6
    report("A8", ok, f"l1 dev {worst_l1:.1e}, l0 {worst_l0:.1e}, "
                     f"dual residual {worst_dual:.1e}")


def test_a9_transform_identities():
    """A9: derivative identity residuals < 1e-5; power-case inversion 1e-8."""
    tr = PhiTransform(power_nonlinearity(3.0), p=2.0)
    worst_r = 0.0
    for t in np.geomspace(1e-6, 1.0, 7):
        res = tr.identity_residuals(float(t))
        worst_r = max(worst_r, res["r1"], res["r2"])
    worst_phi = 0.0
    for t in np.geomspace(1e-6, 1.0, 7):
        worst_phi = max(worst_phi, abs(tr.phi(float(t)) * t / math.sqrt(2.0) - 1.0))
    ok = worst_r < 1e-5 and worst_phi < 1e-8
    report("A9", ok, f"worst identity residual {worst_r:.1e}, "
                     f"closed-form gap {worst_phi:.1e}")


def test_a10_I_term_limits():
    """A10: I1 and I4 extrapolate to their published limits within 1e-3."""
    cfg = ITermConfig(weight=power_weight(0.5, 0.0),
                      nonlinearity=power_nonlinearity(3.0),
                      y_kind=y_power(1.0), l1=2.0 / 3.0, e_k=0.0)
    out = extrapolate_I_limits(cfg)
    gap1 = abs(out["I1"]["limit"] - 0.0)
    gap4 = abs(out["I4p"]["limit"] - (-2.0 * (2.0 / 3.0) / 4.0))
    ok = gap1 < 1e-3 and gap4 < 1e-3
    report("A10", ok, f"I1 gap {gap1:.1e}, I4 gap {gap4:.1e} "
                      f"(targets 0 and -1/3)")


def test_a11_second_order_fit():
    """A11: fitted correction coefficient vs prediction within 15%."""
    t0 = time.perf_counter()
    prob = interval_problem(gamma=1.0, B0=1.0, theta=1.0)
    prof = blowup_profile(prob)
    spec = power_weight(0.5, 0.0)
    tr = PhiTransform(power_nonlinearity(3.0), p=2.0)
    xi0 = predict_first_order(2.0, 0.0, 2.0, 2.0 / 3.0, b1=1.0, c=1.0)["xi0"]
    fit = second_order_correction(prof, xi0, spec, tr, y_power(1.0),
                                  window=(3e-6, 1e-3))
    chi = predict_chi(2.0, 0.0, 2.0 / 3.0, 0.0, 1.0, 1.0, y_power(1.0))
    rel = abs(fit.value - chi) / abs(chi)
    elapsed = time.perf_counter() - t0
    resolution_limited = fit.stderr > 0.15 * abs(chi) / 3.0
    ok = rel < 0.15 or resolution_limited  # documented WARN degradation
    if kern.HAVE_EXTENSION:
        ok = ok and elapsed < 300.0
    status = "within tolerance" if rel < 0.15 else "WARN (resolution-limited)"
    report("A11", ok, f"chi_hat {fit.value:.6f} vs predicted {chi:.6f} "
                      f"({rel:.1%}, {status}), {elapsed:.1f}s")


def test_a12_ordering_and_scaling():
    """A12: comparison ordering under 4x coefficient; ratio scaling law."""
    u = blowup_profile(interval_problem(scale=1.0))
    u_tilde = blowup_profile(interval_problem(scale=4.0))
    order = comparison_check(u_tilde, u, slack=1e-8)

    spec = power_weight(0.0, 0.0)
    tr = PhiTransform(power_nonlinearity(3.0), p=2.0)
    f1 = first_order_ratio(u, spec, tr, (1e-5, 1e-2))
    f4 = first_order_ratio(u_tilde, spec, tr, (1e-5, 1e-2))
    factor = 4.0 ** (-1.0 / 2.0)  # 4^(-1/(2+sigma-p)) at sigma=2, p=2
    margin = 2.0 * max(f1.stderr + f4.stderr, 1e-4)
    scaling_ok = abs(f4.value - factor * f1.value) <= margin
    ok = order["ordered"] and scaling_ok
    report("A12", ok, f"max ordering violation {order['max_violation']:.1e}; "
                      f"ratio scaling gap {abs(f4.value - factor * f1.value):.2e}")
