"""Sequence-to-limit helpers: Aitken delta-squared and Richardson tables.

All limit estimates in the package funnel through `limit_estimate`, which
applies iterated Aitken acceleration to a sequence sampled on a decreasing
(usually geometric) grid and reports a self-consistency error estimate:
the gap between the last two accelerated values.
"""

from __future__ import annotations

import math

from .errors import NonConvergentError


def aitken_step(seq):
    """One Aitken delta-squared sweep. Returns a sequence two entries shorter."""
    out = []
    for i in range(len(seq) - 2):
        x0, x1, x2 = seq[i], seq[i + 1], seq[i + 2]
        denom = (x2 - x1) - (x1 - x0)
        if denom == 0 or not math.isfinite(denom):
            out.append(x2)
        else:
            out.append(x2 - (x2 - x1) ** 2 / denom)
    return out


def aitken(seq, sweeps=2):
    """Iterated Aitken acceleration; returns the accelerated tail sequence."""
    cur = list(seq)
    for _ in range(sweeps):
        if len(cur) < 3:
            break
        cur = aitken_step(cur)
    return cur


def richardson(values, ratio, order=1):
    """Richardson table for values sampled at steps h, h/ratio, h/ratio^2, ...

    Assumes an error expansion in integer powers of h starting at `order`.
    Returns the highest-order corner of the table.
    """
    table = list(values)
    n = len(table)
    k = order
    for level in range(1, n):
        mult = ratio ** k
        table = [(mult * table[i + 1] - table[i]) / (mult - 1.0)
                 for i in range(len(table) - 1)]
        k += 1
    return table[0]


def limit_estimate(values, rel_tol=1e-4, sweeps=2, context="", abs_tol=1e-13):
    """Extrapolate a sequence of limit samples to its limit.

    Returns (limit, err) where err is the spread of the last two accelerated
    entries. Raises NonConvergentError when that spread exceeds `rel_tol`
    relative to the limit's scale.
    """
    vals = [v for v in values if math.isfinite(v)]
    if len(vals) < 3:
        raise NonConvergentError(f"{context}: too few finite samples to extrapolate")
    acc = aitken(vals, sweeps=sweeps)
    if len(acc) < 2:
        acc = vals[-2:]
    lim = acc[-1]
    err = abs(acc[-1] - acc[-2])
    # the absolute floor keeps limits that are numerically zero acceptable
    if not math.isfinite(lim) or err > max(rel_tol * abs(lim), abs_tol):
        raise NonConvergentError(
            f"{context}: extrapolants oscillate (last gap {err:.3e} vs limit {lim:.6e})")
    return lim, err


def limit_estimate_slow(values, small_params, rel_tol=1e-4, context=""):
    """Limit of samples that may converge only logarithmically.

    Tries geometric (Aitken) acceleration first; when that fails, reads the
    constant term off polynomial fits in the supplied small parameter
    (e.g. 1/ln u), using the degree-2 vs degree-3 disagreement as the error
    estimate. Raises NonConvergentError when neither route settles.
    """
    import numpy as np
    xs = np.asarray(small_params, dtype=float)
    vs = np.asarray(values, dtype=float)
    ok = np.isfinite(vs)
    if ok.sum() < 6:
        raise NonConvergentError(f"{context}: too few samples for a slow-limit fit")
    xs, vs = xs[ok], vs[ok]
    order = np.argsort(np.abs(xs))
    xs, vs = np.abs(xs[order]), vs[order]
    scale = max(abs(vs[0]), 1e-30)

    # a genuine slow limit is approached monotonically in the small
    # parameter; sign flips in the increments mean an oscillating factor
    dv = np.diff(vs)
    big = np.abs(dv) > 1e-5 * scale
    signs = np.sign(dv[big])
    if len(signs) >= 2 and np.any(signs[1:] != signs[:-1]):
        raise NonConvergentError(f"{context}: samples oscillate; no slow limit")

    candidates = []
    lima, erra, _ = limit_estimate_loose(list(vs[::-1]))
    if math.isfinite(lima):
        candidates.append((erra, lima))
    # drop the largest-x third before fitting: it carries transients that
    # are not polynomial in the small parameter
    n_keep = max(6, (2 * len(xs)) // 3)
    xf, vf = xs[:n_keep], vs[:n_keep]
    cs = [float(np.polynomial.polynomial.polyfit(xf, vf, d)[0]) for d in (1, 2, 3)]
    errp = abs(cs[2] - cs[1])
    if math.isfinite(cs[1]):
        candidates.append((errp, cs[1]))
    if not candidates:
        raise NonConvergentError(f"{context}: no finite limit candidate")
    err, lim = min(candidates)
    if err > max(rel_tol * abs(lim), 1e-13):
        raise NonConvergentError(
            f"{context}: extrapolants disagree (gap {err:.3e} vs limit {lim:.6e})")
    return lim, err


def truncate_noise_tail(values, slack=3.0, keep_min=4):
    """Longest prefix of a limit sequence before noise takes over.

    Genuine convergence has (eventually) non-increasing increments; once an
    increment jumps by more than `slack` over its predecessor, the rest of
    the sequence is treated as noise-dominated and dropped.
    """
    vals = list(values)
    if len(vals) <= keep_min:
        return vals
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    cut = len(vals)
    for j in range(1, len(diffs)):
        if diffs[j] > slack * max(diffs[j - 1], 1e-300) and j + 1 >= keep_min:
            cut = j + 1
            break
    return vals[:max(cut, keep_min)]


def limit_estimate_loose(values, sweeps=2):
    """Like limit_estimate but never raises; returns (limit, err, converged)."""
    vals = [v for v in values if math.isfinite(v)]
    if len(vals) < 3:
        if not vals:
            return math.nan, math.inf, False
        return vals[-1], math.inf, False
    acc = aitken(vals, sweeps=sweeps)
    if len(acc) < 2:
        acc = vals[-2:]
    lim = acc[-1]
    err = abs(acc[-1] - acc[-2])
    return lim, err, math.isfinite(lim) and err <= max(1e-3 * abs(lim), 1e-9)
