"""Empirical rate extraction from computed profiles, and the verdicts.

fit_power reads the boundary exponent/constant off a log-log regression;
first_order_ratio extrapolates u / phi(K(d)) to the boundary and compares
with the predicted ratio constant; second_order_correction extracts the
next-order coefficient; adjudicate_variant runs the whole pipeline over a
problem family to decide empirically between the two published numerator
variants of the ratio constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import asymptotics
from .errors import (DecompositionMismatchError, DomainError,
                     FirstOrderMismatchError, InsufficientResolutionError,
                     WindowTooSmallError)
from .extrapolation import aitken
from .karamata import KaramataSpec, YScale, big_k, power_weight
from .nonlinearity import power_nonlinearity
from .radial import RadialProblem, SolutionProfile, blowup_profile, CoefficientPower
from .transform import PhiTransform

DEFAULT_WINDOW = (1e-5, 1e-2)  # distances, in units of R
POINTS_PER_DECADE = 8


def _window_samples(profile: SolutionProfile, window, per_decade=POINTS_PER_DECADE):
    """Log-spaced (d, u) samples inside the window, from the profile nodes.

    Values are interpolated in log-log space, where blow-up profiles are
    nearly linear, so the resampling adds no meaningful error.
    """
    d_min, d_max = window
    if not (0 < d_min < d_max):
        raise DomainError("fit window must satisfy 0 < d_min < d_max")
    d = profile.distances()
    u = profile.values
    ok = (d > 0) & (u > 0) & np.isfinite(u)
    d, u = d[ok], u[ok]
    order = np.argsort(d)
    d, u = d[order], u[order]
    uniq = np.concatenate([[True], np.diff(d) > 0])
    d, u = d[uniq], u[uniq]
    inside = (d >= d_min * 0.999) & (d <= d_max * 1.001)
    if inside.sum() < 8:
        raise WindowTooSmallError(
            f"window [{d_min:g}, {d_max:g}] covers only {int(inside.sum())} profile nodes")
    lo = max(d_min, d.min())
    hi = min(d_max, d.max())
    if hi <= lo:
        raise WindowTooSmallError("window does not intersect the profile range")
    n = max(8, int(round(per_decade * math.log10(hi / lo))))
    ds = np.geomspace(lo, hi, n)
    interp = PchipInterpolator(np.log(d), np.log(u))
    return ds, np.exp(interp(np.log(ds)))


@dataclass
class PowerFit:
    beta_hat: float
    C_hat: float
    stderr_beta: float
    stderr_C: float
    window: tuple
    n_points: int


def fit_power(profile: SolutionProfile, window=DEFAULT_WINDOW) -> PowerFit:
    """Ordinary least squares of ln u on ln d: u ~ C_hat * d^(-beta_hat)."""
    ds, us = _window_samples(profile, window)
    x = np.log(ds)
    yv = np.log(us)
    n = len(x)
    xbar = x.mean()
    sxx = np.sum((x - xbar) ** 2)
    slope = np.sum((x - xbar) * (yv - yv.mean())) / sxx
    intercept = yv.mean() - slope * xbar
    resid = yv - (intercept + slope * x)
    s2 = float(np.sum(resid ** 2)) / max(n - 2, 1)
    se_slope = math.sqrt(s2 / sxx)
    se_inter = math.sqrt(s2 * (1.0 / n + xbar ** 2 / sxx))
    C = math.exp(intercept)
    return PowerFit(beta_hat=-slope, C_hat=C, stderr_beta=se_slope,
                    stderr_C=C * se_inter, window=(float(ds[0]), float(ds[-1])),
                    n_points=n)


@dataclass
class RatioFit:
    value: float
    stderr: float
    trace_d: np.ndarray
    trace: np.ndarray
    meta: dict


def _ratio_extrapolate(ds, vals, context):
    """Boundary limit of a ratio sampled on geometric distances (Aitken)."""
    seq = list(vals[::-1])  # decreasing d
    acc = aitken(seq, sweeps=2)
    if len(acc) < 2:
        acc = seq[-2:]
    value = acc[-1]
    err = abs(acc[-1] - acc[-2])
    return value, err


def first_order_ratio(profile: SolutionProfile, karamata: KaramataSpec,
                      transform: PhiTransform, window=DEFAULT_WINDOW,
                      problem: Optional[RadialProblem] = None) -> RatioFit:
    """Extrapolated boundary limit of u / phi(K(d)).

    When the generating problem is supplied, the coefficient is checked to
    factor through the declared weight pair: b(r) / (d^(alpha - alpha p/2)
    k(d)^p) must stabilize over the window, else the ratio constant has no
    meaning and DecompositionMismatchError is raised.
    """
    ds, us = _window_samples(profile, window)
    Ks = np.array([big_k(karamata, d) for d in ds])
    phis = np.array([transform.phi(K) for K in Ks])
    ratio = us / phis

    meta = {}
    if problem is not None:
        p = problem.p
        alpha = karamata.alpha
        denom = ds ** (alpha - alpha * p / 2.0) \
            * np.array([karamata.k(d) for d in ds]) ** p
        c_est = problem.coeff(problem.radius - ds) / denom
        spread = (c_est.max() - c_est.min()) / abs(np.median(c_est))
        # judge stabilization on the boundary-side half of the window
        half = c_est[ds <= math.sqrt(ds[0] * ds[-1])]
        half_spread = (half.max() - half.min()) / abs(np.median(half))
        if half_spread > 0.05:
            raise DecompositionMismatchError(
                f"coefficient/weight ratio varies by {half_spread:.1%} "
                "over the inner window")
        meta["c_est"] = float(half[np.argmin(ds[ds <= math.sqrt(ds[0] * ds[-1])])]) \
            if len(half) else float(c_est[0])
        meta["c_spread"] = float(spread)

    value, err = _ratio_extrapolate(ds, ratio, "first-order ratio")
    return RatioFit(value=value, stderr=err, trace_d=ds, trace=ratio, meta=meta)


def second_order_correction(profile: SolutionProfile, xi0: float,
                            karamata: KaramataSpec, transform: PhiTransform,
                            y_kind: YScale, window=(1e-5, 1e-3),
                            resolution=1e-6) -> RatioFit:
    """Extrapolated limit of ((u / (xi0 phi(K(d)))) - 1) / y(d).

    Second-order signals are small: the profile must resolve distances
    down to `resolution`, and the first-order ratio must already agree
    with xi0 (checked here; FirstOrderMismatchError otherwise).
    """
    if transform.p != 2.0:
        raise DomainError("second-order fits are defined for p = 2")
    d = profile.distances()
    if d[np.isfinite(profile.values) & (profile.values > 0)].min() > resolution:
        raise InsufficientResolutionError(
            f"profile resolved to {d.min():.2e}, need {resolution:g}")
    ds, us = _window_samples(profile, window)
    Ks = np.array([big_k(karamata, d_) for d_ in ds])
    phis = np.array([transform.phi(K) for K in Ks])
    ratio = us / (xi0 * phis)

    first_order, fo_err = _ratio_extrapolate(ds, ratio, "first-order control")
    if abs(first_order - 1.0) > max(10.0 * fo_err, 1e-3):
        raise FirstOrderMismatchError(
            f"u/(xi0 phi(K)) extrapolates to {first_order:.6f}, not 1")

    ys = np.array([float(y_kind(d_)) for d_ in ds])
    vals = (ratio - 1.0) / ys
    value, err = _ratio_extrapolate(ds, vals, "second-order coefficient")
    meta = {"first_order_control": first_order}
    if y_kind.kind == "power" and y_kind.exponent >= 1.0:
        # t/y(t) -> 0 fails for scales at least linear; the published
        # hypothesis excludes them even though the scale table allows them
        meta["outside_stated_hypothesis"] = True
    return RatioFit(value=value, stderr=err, trace_d=ds, trace=vals, meta=meta)


# ---------------------------------------------------------------------------
# the numerator adjudication experiment
# ---------------------------------------------------------------------------

def decomposition_weight(problem: RadialProblem) -> KaramataSpec:
    """The power weight through which the problem's coefficient factors.

    With b(r) = c d^g and the declared boundary pair d^(alpha - alpha p/2)
    k(d)^p, a power weight k = t^qk matches exactly when
    qk = (g - alpha + alpha p / 2) / p.
    """
    if not isinstance(problem.b, CoefficientPower) or problem.b.B0 != 0.0:
        raise DomainError("adjudication needs a pure power coefficient")
    p = problem.p
    alpha = problem.alpha if problem.weight_kind == "distance" else 0.0
    qk = (problem.b.gamma - alpha + alpha * p / 2.0) / p
    return power_weight(qk, alpha)


# relative floor on the fit uncertainty used in match margins: extrapolation
# error estimates can be optimistic about systematic solver bias
STDERR_FLOOR = 1e-4


def adjudicate_problem(problem: RadialProblem, window=DEFAULT_WINDOW) -> dict:
    """Measure xi_hat for one problem and score both numerator variants."""
    qf = problem.f_power
    if qf is None:
        raise DomainError("adjudication needs a pure power absorption")
    sigma = qf - 1.0
    alpha = problem.alpha if problem.weight_kind == "distance" else 0.0
    spec = decomposition_weight(problem)
    l1 = spec.l1_exact
    c = problem.b.scale
    transform = PhiTransform(power_nonlinearity(qf), p=problem.p)

    profile = blowup_profile(problem)
    fit = first_order_ratio(profile, spec, transform, window, problem=problem)

    xi_th = asymptotics.predict_first_order(problem.p, alpha, sigma, l1,
                                            b1=c, c=c,
                                            variant=asymptotics.VARIANT_THEOREM)["xi0"]
    xi_pr = asymptotics.predict_first_order(problem.p, alpha, sigma, l1,
                                            b1=c, c=c,
                                            variant=asymptotics.VARIANT_PROOF)["xi0"]
    margin = 2.0 * max(fit.stderr, STDERR_FLOOR * abs(fit.value))
    match_th = abs(fit.value - xi_th) <= margin
    match_pr = abs(fit.value - xi_pr) <= margin
    if match_th and match_pr:
        verdict = "inconclusive"
    elif match_th:
        verdict = "theorem"
    elif match_pr:
        verdict = "proof"
    else:
        verdict = "neither"
    return {
        "p": problem.p, "alpha": alpha, "sigma": sigma, "l1": l1, "c": c,
        "xi_hat": fit.value, "stderr": fit.stderr, "margin": margin,
        "xi_theorem": xi_th, "xi_proof": xi_pr,
        "variants_coincide": abs(xi_th - xi_pr) < 1e-14 * abs(xi_th),
        "verdict": verdict,
    }


def adjudicate_variant(problems, window=DEFAULT_WINDOW) -> dict:
    """Run the variant experiment over a family and aggregate the verdict.

    Control cases where the two variants coincide (p = 2) are reported as
    inconclusive-by-design and excluded from the aggregation.
    """
    rows = []
    for prob in problems:
        row = adjudicate_problem(prob, window)
        if row["variants_coincide"]:
            row["verdict"] = "inconclusive_by_design"
        rows.append(row)
    decisive = {r["verdict"] for r in rows
                if r["verdict"] in ("theorem", "proof")}
    if len(decisive) == 1:
        overall = decisive.pop()
    elif not decisive:
        overall = "inconclusive"
    else:
        overall = "conflicting"
    return {"rows": rows, "selected_variant": overall}


# ---------------------------------------------------------------------------
# synthetic profiles (test scaffolding and tracing)
# ---------------------------------------------------------------------------

def synthetic_profile(fn, radius=1.0, d_min=1e-7, d_max=0.5, n=400) -> SolutionProfile:
    """Profile built from an explicit u(d); derivative by central differences."""
    d = np.geomspace(d_max, d_min, n)
    u = np.array([float(fn(x)) for x in d])
    h = d * 1e-6
    du = np.array([(float(fn(x - hx)) - float(fn(x + hx))) / (2.0 * hx)
                   for x, hx in zip(d, h)])  # du/dr = -du/dd
    grid = radius - d
    return SolutionProfile(grid, u, du, {"blow_up": True, "synthetic": True},
                           radius, dists=d)
