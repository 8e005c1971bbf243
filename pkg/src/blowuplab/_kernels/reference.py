"""Pure-Python integrator for the radial first-integral system.

State is (u, Q) with Q(r) = integral_0^r s^(N-1) b(s) f(u(s)) ds, so that

    du/dr = ( r^(1-N) Q / w(r) )^(1/(p-1)),      dQ/dr = r^(N-1) b(r) f(u).

Carrying Q instead of the flux derivative sidesteps the degeneracy of the
p-Laplacian at vanishing gradient entirely: no regularization is needed.

The stepper is an embedded Dormand-Prince 5(4) pair with standard step
control. Blow-up is detected by escalating thresholds on u whose crossing
radii are extrapolated by the caller. The compiled twin in _radial_cy.pyx
implements the same algorithm with identical coefficients; this module is
both the import-time fallback and the correctness oracle for it.

Parametric problems (power nonlinearity, power coefficient and weight) are
described by plain tuples so both backends share one calling convention:

    params = (N, p, R, w_kind, aw, c, g, B0, theta, qf)

with w_kind 0: w = 1, 1: w = (R-r)^aw, 2: w = r^aw, and
b(r) = c (R-r)^g (1 + B0 (R-r)^theta), f(u) = u^qf.
"""

from __future__ import annotations

import math

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

STATUS_REACHED_END = 0
STATUS_BLOWUP = 1
STATUS_UNDERFLOW = 2

W_CONST = 0
W_DISTANCE = 1
W_CENTER = 2

DEFAULT_THRESHOLDS = (1e6, 1e8, 1e10, 1e12)


def _rhs_param(params, r, u, Q):
    N, p, R, w_kind, aw, c, g, B0, theta, qf = params
    d = R - r
    b = c
    if g != 0.0:
        b *= d ** g
    if B0 != 0.0:
        b *= 1.0 + B0 * d ** theta
    dQ = b * (u ** qf) if u > 0.0 else 0.0
    if N != 1.0:
        dQ *= r ** (N - 1.0)
    flux = Q
    if N != 1.0:
        flux *= r ** (1.0 - N)
    if w_kind == W_DISTANCE:
        flux /= d ** aw
    elif w_kind == W_CENTER:
        flux /= r ** aw
    du = flux ** (1.0 / (p - 1.0)) if flux > 0.0 else 0.0
    return du, dQ


def integrate(params, r0, u0, Q0, r_end, rtol=1e-11, atol_u=1e-12, atol_q=1e-300,
              thresholds=DEFAULT_THRESHOLDS, out_nodes=None, record=False,
              h_min_frac=1e-14, max_steps=2_000_000):
    """Advance the radial system from r0 to r_end or blow-up.

    Returns a dict with keys: status, r, u, Q, du, crossings (one radius per
    threshold crossed), and, when record is true, arrays rs/us/dus/qs of all
    accepted steps (output nodes are landed on exactly).
    """
    return _integrate_core(lambda r, u, Q: _rhs_param(params, r, u, Q),
                           r0, u0, Q0, r_end, rtol, atol_u, atol_q,
                           thresholds, out_nodes, record, h_min_frac, max_steps)


def integrate_generic(w, b, f, N, p, r0, u0, Q0, r_end, **kw):
    """Same loop for caller-supplied w(r), b(r), f(u) callables."""
    inv = 1.0 / (p - 1.0)

    def rhs(r, u, Q):
        dQ = b(r) * f(u)
        if N != 1.0:
            dQ *= r ** (N - 1.0)
        flux = Q
        if N != 1.0:
            flux *= r ** (1.0 - N)
        flux /= w(r)
        du = flux ** inv if flux > 0.0 else 0.0
        return du, dQ

    return _integrate_core(rhs, r0, u0, Q0, r_end, kw.pop("rtol", 1e-11),
                           kw.pop("atol_u", 1e-12), kw.pop("atol_q", 1e-300),
                           kw.pop("thresholds", DEFAULT_THRESHOLDS),
                           kw.pop("out_nodes", None), kw.pop("record", False),
                           kw.pop("h_min_frac", 1e-14), kw.pop("max_steps", 2_000_000))


def _hermite_crossing(ra, ua, dua, rb, ub, dub, thr):
    """Crossing radius of the cubic Hermite interpolant through one step."""
    h = rb - ra
    lo, hi = 0.0, 1.0
    for _ in range(60):
        s = 0.5 * (lo + hi)
        h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
        h10 = s * (1.0 - s) ** 2
        h01 = s * s * (3.0 - 2.0 * s)
        h11 = s * s * (s - 1.0)
        val = h00 * ua + h10 * h * dua + h01 * ub + h11 * h * dub
        if val < thr:
            lo = s
        else:
            hi = s
    return ra + 0.5 * (lo + hi) * h


def _integrate_core(rhs, r0, u0, Q0, r_end, rtol, atol_u, atol_q,
                    thresholds, out_nodes, record, h_min_frac, max_steps):
    span = r_end - r0
    h_min = h_min_frac * max(abs(r_end), abs(span))
    r, u, Q = r0, u0, Q0
    du, dQ = rhs(r, u, Q)

    nodes = sorted(float(n) for n in (out_nodes if out_nodes is not None else []) if r0 < float(n) <= r_end)
    node_idx = 0

    rs, us, dus, qs = [r], [u], [du], [Q]
    crossings = []
    thr_idx = 0
    while thr_idx < len(thresholds) and u >= thresholds[thr_idx]:
        thr_idx += 1

    h = max(span * 1e-10, h_min * 4.0)
    status = STATUS_REACHED_END
    steps = 0
    while r < r_end:
        if steps >= max_steps:
            status = STATUS_UNDERFLOW
            break
        steps += 1
        if h < h_min:
            status = STATUS_UNDERFLOW
            break
        # clip the trial step to land on output nodes / the right endpoint,
        # without letting the clip contaminate the controller's memory in h
        ht = h
        clipped = False
        if node_idx < len(nodes) and r + ht >= nodes[node_idx] - 1e-300:
            ht = nodes[node_idx] - r
            clipped = True
        if r + ht > r_end:
            ht = r_end - r
            clipped = True
        if ht <= 0.0:
            node_idx += 1
            continue

        k1u, k1q = du, dQ
        k2u, k2q = rhs(r + _C2 * ht, u + ht * _A21 * k1u, Q + ht * _A21 * k1q)
        k3u, k3q = rhs(r + _C3 * ht, u + ht * (_A31 * k1u + _A32 * k2u),
                       Q + ht * (_A31 * k1q + _A32 * k2q))
        k4u, k4q = rhs(r + _C4 * ht, u + ht * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
                       Q + ht * (_A41 * k1q + _A42 * k2q + _A43 * k3q))
        k5u, k5q = rhs(r + _C5 * ht,
                       u + ht * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
                       Q + ht * (_A51 * k1q + _A52 * k2q + _A53 * k3q + _A54 * k4q))
        k6u, k6q = rhs(r + ht,
                       u + ht * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
                       Q + ht * (_A61 * k1q + _A62 * k2q + _A63 * k3q + _A64 * k4q + _A65 * k5q))
        u_new = u + ht * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        Q_new = Q + ht * (_B1 * k1q + _B3 * k3q + _B4 * k4q + _B5 * k5q + _B6 * k6q)
        k7u, k7q = rhs(r + ht, u_new, Q_new)

        err_u = ht * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        err_q = ht * (_E1 * k1q + _E3 * k3q + _E4 * k4q + _E5 * k5q + _E6 * k6q + _E7 * k7q)
        sc_u = atol_u + rtol * max(abs(u), abs(u_new))
        sc_q = atol_q + rtol * max(abs(Q), abs(Q_new))
        err = math.sqrt(0.5 * ((err_u / sc_u) ** 2 + (err_q / sc_q) ** 2))

        if err <= 1.0:
            r_prev, u_prev, du_prev = r, u, du
            r, u, Q = r + ht, u_new, Q_new
            du, dQ = k7u, k7q
            while thr_idx < len(thresholds) and u >= thresholds[thr_idx]:
                crossings.append(_hermite_crossing(r_prev, u_prev, du_prev,
                                                   r, u, du, thresholds[thr_idx]))
                thr_idx += 1
            if record:
                rs.append(r)
                us.append(u)
                dus.append(du)
                qs.append(Q)
            if node_idx < len(nodes) and r >= nodes[node_idx] - 1e-300:
                node_idx += 1
            if thr_idx >= len(thresholds):
                status = STATUS_BLOWUP
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if clipped:
                h = max(h, ht * fac)
            else:
                h = ht * fac
        else:
            h = ht * max(0.2, 0.9 * err ** -0.2)

    return {
        "status": status,
        "r": r, "u": u, "Q": Q, "du": du,
        "crossings": crossings,
        "rs": rs if record else None,
        "us": us if record else None,
        "dus": dus if record else None,
        "qs": qs if record else None,
        "n_steps": steps,
    }


# ---------------------------------------------------------------------------
# boundary phase in the log-distance variable
# ---------------------------------------------------------------------------

KLASS_EXPLODE = 1
KLASS_SURVIVE = -1
KLASS_DEEP_END = 0


def integrate_log_boundary(params, tau0, u0, Q0, tau_end, beta, rtol=1e-11,
                           atol_u=None, out_taus=None, record=False,
                           u_cap=1e40, z_hi_mult=4.0, z_lo_mult=0.25,
                           h_min=1e-13, max_steps=2_000_000):
    """Boundary-layer integration in tau = -ln(R - r).

    The substitution makes the distance exact at any depth (no cancellation
    against R) and turns blow-up classification into a statement about the
    log-slope z = (du/dtau)/u: z runs away above beta when the trajectory
    explodes before the wall and collapses below beta when it survives past
    it. `beta` is the boundary exponent of the matched solution.

    Returns a dict with klass (+1 explode, -1 survive, 0 ran to tau_end),
    z_end, final state, and recorded arrays (taus, us, dus in du/dr).
    """
    N, p, R, w_kind, aw, c, g, B0, theta, qf = params
    inv = 1.0 / (p - 1.0)

    def rhs(tau, u, Q):
        d = math.exp(-tau)
        r = R - d
        b = c
        if g != 0.0:
            b *= math.exp(-g * tau)
        if B0 != 0.0:
            b *= 1.0 + B0 * math.exp(-theta * tau)
        dQ = d * b * (u ** qf) if u > 0.0 else 0.0
        if N != 1.0:
            dQ *= r ** (N - 1.0)
        flux = Q
        if N != 1.0:
            flux *= r ** (1.0 - N)
        if w_kind == W_DISTANCE:
            flux *= math.exp(aw * tau)
        elif w_kind == W_CENTER:
            flux /= r ** aw
        du = d * flux ** inv if flux > 0.0 else 0.0
        return du, dQ

    if atol_u is None:
        atol_u = 1e-12 * max(1.0, abs(u0))
    atol_q = 1e-300
    tau, u, Q = tau0, u0, Q0
    du, dQ = rhs(tau, u, Q)

    nodes = sorted(float(n) for n in (out_taus if out_taus is not None else [])
                   if tau0 < float(n) <= tau_end)
    node_idx = 0
    taus, us, dus = [tau], [u], [du / math.exp(-tau)]

    h = 1e-6
    klass = KLASS_DEEP_END
    steps = 0
    z = du / u if u > 0 else 0.0
    while tau < tau_end:
        if steps >= max_steps or h < h_min:
            klass = KLASS_EXPLODE  # step collapse only happens against a pole
            break
        steps += 1
        ht = h
        clipped = False
        if node_idx < len(nodes) and tau + ht >= nodes[node_idx] - 1e-300:
            ht = nodes[node_idx] - tau
            clipped = True
        if tau + ht > tau_end:
            ht = tau_end - tau
            clipped = True
        if ht <= 0.0:
            node_idx += 1
            continue

        k1u, k1q = du, dQ
        k2u, k2q = rhs(tau + _C2 * ht, u + ht * _A21 * k1u, Q + ht * _A21 * k1q)
        k3u, k3q = rhs(tau + _C3 * ht, u + ht * (_A31 * k1u + _A32 * k2u),
                       Q + ht * (_A31 * k1q + _A32 * k2q))
        k4u, k4q = rhs(tau + _C4 * ht, u + ht * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
                       Q + ht * (_A41 * k1q + _A42 * k2q + _A43 * k3q))
        k5u, k5q = rhs(tau + _C5 * ht,
                       u + ht * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
                       Q + ht * (_A51 * k1q + _A52 * k2q + _A53 * k3q + _A54 * k4q))
        k6u, k6q = rhs(tau + ht,
                       u + ht * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
                       Q + ht * (_A61 * k1q + _A62 * k2q + _A63 * k3q + _A64 * k4q + _A65 * k5q))
        u_new = u + ht * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        Q_new = Q + ht * (_B1 * k1q + _B3 * k3q + _B4 * k4q + _B5 * k5q + _B6 * k6q)
        k7u, k7q = rhs(tau + ht, u_new, Q_new)

        err_u = ht * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        err_q = ht * (_E1 * k1q + _E3 * k3q + _E4 * k4q + _E5 * k5q + _E6 * k6q + _E7 * k7q)
        sc_u = atol_u + rtol * max(abs(u), abs(u_new))
        sc_q = atol_q + rtol * max(abs(Q), abs(Q_new))
        err = math.sqrt(0.5 * ((err_u / sc_u) ** 2 + (err_q / sc_q) ** 2))

        if err <= 1.0:
            tau, u, Q = tau + ht, u_new, Q_new
            du, dQ = k7u, k7q
            if record:
                taus.append(tau)
                us.append(u)
                dus.append(du / math.exp(-tau))
            if node_idx < len(nodes) and tau >= nodes[node_idx] - 1e-300:
                node_idx += 1
            z = du / u if u > 0 else 0.0
            if z > z_hi_mult * beta or u > u_cap:
                klass = KLASS_EXPLODE
                break
            if z < z_lo_mult * beta:
                klass = KLASS_SURVIVE
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if clipped:
                h = max(h, ht * fac)
            else:
                h = ht * fac
        else:
            h = ht * max(0.2, 0.9 * err ** -0.2)

    if klass == KLASS_DEEP_END and u > 0:
        z = du / u
        klass = KLASS_EXPLODE if z > beta else KLASS_SURVIVE

    return {
        "klass": klass, "z_end": z,
        "tau": tau, "u": u, "Q": Q, "du_dr": du / math.exp(-tau),
        "taus": taus if record else None,
        "us": us if record else None,
        "dus": dus if record else None,
        "n_steps": steps,
    }
