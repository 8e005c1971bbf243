# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of reference.integrate for the parametric problem family.

Same Dormand-Prince 5(4) pair, same step control, same blow-up threshold
handling; only the parametric right-hand side is fused into the loop.
Agreement with the pure-Python reference is covered by tests and measured
by benchmarks/bench_kernels.py.
"""

from libc.math cimport pow, sqrt, fabs, fmax, fmin

cdef double _C2 = 1.0 / 5.0
cdef double _C3 = 3.0 / 10.0
cdef double _C4 = 4.0 / 5.0
cdef double _C5 = 8.0 / 9.0
cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0, _A63 = 46732.0 / 5247.0
cdef double _A64 = 49.0 / 176.0, _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3 = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0, _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0, _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0

STATUS_REACHED_END = 0
STATUS_BLOWUP = 1
STATUS_UNDERFLOW = 2

W_CONST = 0
W_DISTANCE = 1
W_CENTER = 2

DEFAULT_THRESHOLDS = (1e6, 1e8, 1e10, 1e12)


cdef struct Params:
    double N
    double p
    double R
    int w_kind
    double aw
    double c
    double g
    double B0
    double theta
    double qf


cdef inline void _rhs(Params* pp, double r, double u, double Q,
                      double* du, double* dQ) noexcept nogil:
    cdef double d = pp.R - r
    cdef double b = pp.c
    cdef double flux
    if pp.g != 0.0:
        b *= pow(d, pp.g)
    if pp.B0 != 0.0:
        b *= 1.0 + pp.B0 * pow(d, pp.theta)
    if u > 0.0:
        dQ[0] = b * pow(u, pp.qf)
    else:
        dQ[0] = 0.0
    if pp.N != 1.0:
        dQ[0] *= pow(r, pp.N - 1.0)
    flux = Q
    if pp.N != 1.0:
        flux *= pow(r, 1.0 - pp.N)
    if pp.w_kind == 1:
        flux /= pow(d, pp.aw)
    elif pp.w_kind == 2:
        flux /= pow(r, pp.aw)
    if flux > 0.0:
        du[0] = pow(flux, 1.0 / (pp.p - 1.0))
    else:
        du[0] = 0.0


cdef double _hermite_crossing(double ra, double ua, double dua,
                              double rb, double ub, double dub, double thr) noexcept nogil:
    cdef double h = rb - ra
    cdef double lo = 0.0, hi = 1.0, s, h00, h10, h01, h11, val
    cdef int i
    for i in range(60):
        s = 0.5 * (lo + hi)
        h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s)
        h10 = s * (1.0 - s) * (1.0 - s)
        h01 = s * s * (3.0 - 2.0 * s)
        h11 = s * s * (s - 1.0)
        val = h00 * ua + h10 * h * dua + h01 * ub + h11 * h * dub
        if val < thr:
            lo = s
        else:
            hi = s
    return ra + 0.5 * (lo + hi) * h


def integrate(params, double r0, double u0, double Q0, double r_end,
              double rtol=1e-11, double atol_u=1e-12, double atol_q=1e-300,
              thresholds=DEFAULT_THRESHOLDS, out_nodes=None, record=False,
              double h_min_frac=1e-14, long max_steps=2_000_000):
    cdef Params pp
    pp.N = params[0]
    pp.p = params[1]
    pp.R = params[2]
    pp.w_kind = int(params[3])
    pp.aw = params[4]
    pp.c = params[5]
    pp.g = params[6]
    pp.B0 = params[7]
    pp.theta = params[8]
    pp.qf = params[9]

    cdef double span = r_end - r0
    cdef double h_min = h_min_frac * fmax(fabs(r_end), fabs(span))
    cdef double r = r0, u = u0, Q = Q0
    cdef double du, dQ
    _rhs(&pp, r, u, Q, &du, &dQ)

    node_list = sorted(float(n) for n in (out_nodes if out_nodes is not None else []) if r0 < float(n) <= r_end)
    cdef int n_nodes = len(node_list)
    cdef int node_idx = 0
    cdef double[::1] nodes_mv
    import array as _array
    nodes_arr = _array.array("d", node_list) if n_nodes else _array.array("d", [0.0])
    nodes_mv = nodes_arr

    thr_list = list(thresholds)
    cdef int n_thr = len(thr_list)
    thr_arr = _array.array("d", thr_list) if n_thr else _array.array("d", [0.0])
    cdef double[::1] thr_mv = thr_arr
    cdef int thr_idx = 0
    while thr_idx < n_thr and u >= thr_mv[thr_idx]:
        thr_idx += 1

    cdef bint do_record = bool(record)
    rs = [r]
    us = [u]
    dus = [du]
    qs = [Q]
    crossings = []

    cdef double h = fmax(span * 1e-10, h_min * 4.0)
    cdef int status = 0
    cdef long steps = 0
    cdef double ht, err, err_u, err_q, sc_u, sc_q, fac
    cdef double k1u, k1q, k2u, k2q, k3u, k3q, k4u, k4q, k5u, k5q, k6u, k6q, k7u, k7q
    cdef double u_new, Q_new, r_prev, u_prev, du_prev
    cdef bint clipped

    while r < r_end:
        if steps >= max_steps:
            status = 2
            break
        steps += 1
        if h < h_min:
            status = 2
            break
        ht = h
        clipped = False
        if node_idx < n_nodes and r + ht >= nodes_mv[node_idx] - 1e-300:
            ht = nodes_mv[node_idx] - r
            clipped = True
        if r + ht > r_end:
            ht = r_end - r
            clipped = True
        if ht <= 0.0:
            node_idx += 1
            continue

        k1u = du
        k1q = dQ
        _rhs(&pp, r + _C2 * ht, u + ht * _A21 * k1u, Q + ht * _A21 * k1q, &k2u, &k2q)
        _rhs(&pp, r + _C3 * ht, u + ht * (_A31 * k1u + _A32 * k2u),
             Q + ht * (_A31 * k1q + _A32 * k2q), &k3u, &k3q)
        _rhs(&pp, r + _C4 * ht, u + ht * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
             Q + ht * (_A41 * k1q + _A42 * k2q + _A43 * k3q), &k4u, &k4q)
        _rhs(&pp, r + _C5 * ht,
             u + ht * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
             Q + ht * (_A51 * k1q + _A52 * k2q + _A53 * k3q + _A54 * k4q), &k5u, &k5q)
        _rhs(&pp, r + ht,
             u + ht * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
             Q + ht * (_A61 * k1q + _A62 * k2q + _A63 * k3q + _A64 * k4q + _A65 * k5q),
             &k6u, &k6q)
        u_new = u + ht * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        Q_new = Q + ht * (_B1 * k1q + _B3 * k3q + _B4 * k4q + _B5 * k5q + _B6 * k6q)
        _rhs(&pp, r + ht, u_new, Q_new, &k7u, &k7q)

        err_u = ht * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        err_q = ht * (_E1 * k1q + _E3 * k3q + _E4 * k4q + _E5 * k5q + _E6 * k6q + _E7 * k7q)
        sc_u = atol_u + rtol * fmax(fabs(u), fabs(u_new))
        sc_q = atol_q + rtol * fmax(fabs(Q), fabs(Q_new))
        err = sqrt(0.5 * ((err_u / sc_u) * (err_u / sc_u) + (err_q / sc_q) * (err_q / sc_q)))

        if err <= 1.0:
            r_prev = r
            u_prev = u
            du_prev = du
            r = r + ht
            u = u_new
            Q = Q_new
            du = k7u
            dQ = k7q
            while thr_idx < n_thr and u >= thr_mv[thr_idx]:
                crossings.append(_hermite_crossing(r_prev, u_prev, du_prev,
                                                   r, u, du, thr_mv[thr_idx]))
                thr_idx += 1
            if do_record:
                rs.append(r)
                us.append(u)
                dus.append(du)
                qs.append(Q)
            if node_idx < n_nodes and r >= nodes_mv[node_idx] - 1e-300:
                node_idx += 1
            if thr_idx >= n_thr:
                status = 1
                break
            if err == 0.0:
                fac = 5.0
            else:
                fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            if clipped:
                h = fmax(h, ht * fac)
            else:
                h = ht * fac
        else:
            h = ht * fmax(0.2, 0.9 * pow(err, -0.2))

    return {
        "status": status,
        "r": r, "u": u, "Q": Q, "du": du,
        "crossings": crossings,
        "rs": rs if do_record else None,
        "us": us if do_record else None,
        "dus": dus if do_record else None,
        "qs": qs if do_record else None,
        "n_steps": steps,
    }


# ---------------------------------------------------------------------------
# boundary phase in the log-distance variable (twin of the reference)
# ---------------------------------------------------------------------------

from libc.math cimport exp as c_exp

KLASS_EXPLODE = 1
KLASS_SURVIVE = -1
KLASS_DEEP_END = 0


cdef inline void _rhs_log(Params* pp, double tau, double u, double Q,
                          double* du, double* dQ) noexcept nogil:
    cdef double d = c_exp(-tau)
    cdef double r = pp.R - d
    cdef double b = pp.c
    cdef double flux
    if pp.g != 0.0:
        b *= c_exp(-pp.g * tau)
    if pp.B0 != 0.0:
        b *= 1.0 + pp.B0 * c_exp(-pp.theta * tau)
    if u > 0.0:
        dQ[0] = d * b * pow(u, pp.qf)
    else:
        dQ[0] = 0.0
    if pp.N != 1.0:
        dQ[0] *= pow(r, pp.N - 1.0)
    flux = Q
    if pp.N != 1.0:
        flux *= pow(r, 1.0 - pp.N)
    if pp.w_kind == 1:
        flux *= c_exp(pp.aw * tau)
    elif pp.w_kind == 2:
        flux /= pow(r, pp.aw)
    if flux > 0.0:
        du[0] = d * pow(flux, 1.0 / (pp.p - 1.0))
    else:
        du[0] = 0.0


def integrate_log_boundary(params, double tau0, double u0, double Q0,
                           double tau_end, double beta, double rtol=1e-11,
                           atol_u=None, out_taus=None, record=False,
                           double u_cap=1e40, double z_hi_mult=4.0,
                           double z_lo_mult=0.25, double h_min=1e-13,
                           long max_steps=2_000_000):
    cdef Params pp
    pp.N = params[0]
    pp.p = params[1]
    pp.R = params[2]
    pp.w_kind = int(params[3])
    pp.aw = params[4]
    pp.c = params[5]
    pp.g = params[6]
    pp.B0 = params[7]
    pp.theta = params[8]
    pp.qf = params[9]

    cdef double a_u = 1e-12 * fmax(1.0, fabs(u0)) if atol_u is None else float(atol_u)
    cdef double atol_q = 1e-300
    cdef double tau = tau0, u = u0, Q = Q0
    cdef double du, dQ
    _rhs_log(&pp, tau, u, Q, &du, &dQ)

    node_list = sorted(float(n) for n in (out_taus if out_taus is not None else [])
                       if tau0 < float(n) <= tau_end)
    cdef int n_nodes = len(node_list)
    cdef int node_idx = 0
    import array as _array
    nodes_arr = _array.array("d", node_list) if n_nodes else _array.array("d", [0.0])
    cdef double[::1] nodes_mv = nodes_arr

    cdef bint do_record = bool(record)
    taus = [tau]
    us = [u]
    dus = [du / c_exp(-tau)]

    cdef double h = 1e-6
    cdef int klass = 0
    cdef long steps = 0
    cdef double z = du / u if u > 0 else 0.0
    cdef double ht, err, err_u, err_q, sc_u, sc_q, fac
    cdef double k1u, k1q, k2u, k2q, k3u, k3q, k4u, k4q, k5u, k5q, k6u, k6q, k7u, k7q
    cdef double u_new, Q_new
    cdef bint clipped

    while tau < tau_end:
        if steps >= max_steps or h < h_min:
            klass = 1
            break
        steps += 1
        ht = h
        clipped = False
        if node_idx < n_nodes and tau + ht >= nodes_mv[node_idx] - 1e-300:
            ht = nodes_mv[node_idx] - tau
            clipped = True
        if tau + ht > tau_end:
            ht = tau_end - tau
            clipped = True
        if ht <= 0.0:
            node_idx += 1
            continue

        k1u = du
        k1q = dQ
        _rhs_log(&pp, tau + _C2 * ht, u + ht * _A21 * k1u, Q + ht * _A21 * k1q, &k2u, &k2q)
        _rhs_log(&pp, tau + _C3 * ht, u + ht * (_A31 * k1u + _A32 * k2u),
                 Q + ht * (_A31 * k1q + _A32 * k2q), &k3u, &k3q)
        _rhs_log(&pp, tau + _C4 * ht, u + ht * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
                 Q + ht * (_A41 * k1q + _A42 * k2q + _A43 * k3q), &k4u, &k4q)
        _rhs_log(&pp, tau + _C5 * ht,
                 u + ht * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
                 Q + ht * (_A51 * k1q + _A52 * k2q + _A53 * k3q + _A54 * k4q), &k5u, &k5q)
        _rhs_log(&pp, tau + ht,
                 u + ht * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
                 Q + ht * (_A61 * k1q + _A62 * k2q + _A63 * k3q + _A64 * k4q + _A65 * k5q),
                 &k6u, &k6q)
        u_new = u + ht * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        Q_new = Q + ht * (_B1 * k1q + _B3 * k3q + _B4 * k4q + _B5 * k5q + _B6 * k6q)
        _rhs_log(&pp, tau + ht, u_new, Q_new, &k7u, &k7q)

        err_u = ht * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        err_q = ht * (_E1 * k1q + _E3 * k3q + _E4 * k4q + _E5 * k5q + _E6 * k6q + _E7 * k7q)
        sc_u = a_u + rtol * fmax(fabs(u), fabs(u_new))
        sc_q = atol_q + rtol * fmax(fabs(Q), fabs(Q_new))
        err = sqrt(0.5 * ((err_u / sc_u) * (err_u / sc_u) + (err_q / sc_q) * (err_q / sc_q)))

        if err <= 1.0:
            tau = tau + ht
            u = u_new
            Q = Q_new
            du = k7u
            dQ = k7q
            if do_record:
                taus.append(tau)
                us.append(u)
                dus.append(du / c_exp(-tau))
            if node_idx < n_nodes and tau >= nodes_mv[node_idx] - 1e-300:
                node_idx += 1
            z = du / u if u > 0 else 0.0
            if z > z_hi_mult * beta or u > u_cap:
                klass = 1
                break
            if z < z_lo_mult * beta:
                klass = -1
                break
            if err == 0.0:
                fac = 5.0
            else:
                fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            if clipped:
                h = fmax(h, ht * fac)
            else:
                h = ht * fac
        else:
            h = ht * fmax(0.2, 0.9 * pow(err, -0.2))

    if klass == 0 and u > 0:
        z = du / u
        klass = 1 if z > beta else -1

    return {
        "klass": klass, "z_end": z,
        "tau": tau, "u": u, "Q": Q, "du_dr": du / c_exp(-tau),
        "taus": taus if do_record else None,
        "us": us if do_record else None,
        "dus": dus if do_record else None,
        "n_steps": steps,
    }
