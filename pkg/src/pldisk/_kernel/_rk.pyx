# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled integrator core. Mirrors rk_py.integrate_raw (same arithmetic)."""

from libc.math cimport sqrt, fabs, isfinite, pow as cpow

import numpy as np

from .common import (
    FIELD_TAU, FIELD_X, FIELD_U1, FIELD_V1, FIELD_U2, FIELD_V2,
    CFG_STOP_U_AXIS, CFG_U_AXIS_SIGN, CFG_U_AXIS_MIN_DT, CFG_STOP_SING,
    CFG_RHO_ENTER, CFG_RHO_EXIT, CFG_LAM2_CAP, CFG_SING_GUARD,
    CFG_RECORD_CROSS, CFG_H0,
    ST_STEP_LIMIT, ST_T_CAP, ST_U_AXIS, ST_SING_LINE, ST_RHO_ENTER,
    ST_RHO_EXIT, ST_LAM2_CAP, ST_TARGET, ST_UNDERFLOW, ST_X_SINGULAR,
)

cdef double SAFETY = 0.9
cdef double PI_ALPHA = 0.7 / 5.0
cdef double PI_BETA = 0.4 / 5.0
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 5.0
cdef double BISECT_TOL = 1e-12

cdef int C_TAU = FIELD_TAU
cdef int C_X = FIELD_X
cdef int C_U1 = FIELD_U1
cdef int C_V1 = FIELD_V1
cdef int C_U2 = FIELD_U2
cdef int C_V2 = FIELD_V2


cdef inline void field_eval(int field, double D, double alpha, double mu,
                            double y1, double y2, double* f1, double* f2) noexcept nogil:
    cdef double w
    if field == 0:   # tau
        f1[0] = y2
        f2[0] = -mu * y1 * (1.0 - y1) * (D + 2.0 * alpha * y1)
    elif field == 1:  # x
        w = D + 2.0 * alpha * y1
        f1[0] = y2 / w
        f2[0] = -mu * y1 * (1.0 - y1)
    elif field == 2:  # U1
        f1[0] = -y1 * y2
        f2[0] = -mu * D * y1 * y1 - mu * (2.0 * alpha - D) * y1 + 2.0 * alpha * mu - 2.0 * y2 * y2
    elif field == 3:  # V1
        f1[0] = -y1 * y2
        f2[0] = -mu * D * y1 * y1 + mu * (2.0 * alpha - D) * y1 + 2.0 * alpha * mu - 2.0 * y2 * y2
    elif field == 4:  # U2
        f1[0] = (0.5 * mu * D * (y1 * y1 * y1) * y2
                 + 0.5 * mu * (2.0 * alpha - D) * y1 * y1 * y2 * y2
                 - alpha * mu * y1 * (y2 * y2 * y2))
        f2[0] = (1.0 + 0.5 * mu * D * y1 * y1 * y2 * y2
                 + 0.5 * mu * (2.0 * alpha - D) * y1 * (y2 * y2 * y2)
                 - alpha * mu * (y2 * y2) * (y2 * y2))
    else:  # V2
        f1[0] = (0.5 * mu * D * (y1 * y1 * y1) * y2
                 - 0.5 * mu * (2.0 * alpha - D) * y1 * y1 * y2 * y2
                 - alpha * mu * y1 * (y2 * y2 * y2))
        f2[0] = (1.0 + 0.5 * mu * D * y1 * y1 * y2 * y2
                 - 0.5 * mu * (2.0 * alpha - D) * y1 * (y2 * y2 * y2)
                 - alpha * mu * (y2 * y2) * (y2 * y2))


cdef inline double rho_interior(double u, double v) noexcept nogil:
    return sqrt(sqrt(u * u * u * u + v * v))


cdef inline double rho_chart(int field, double l1, double l2) noexcept nogil:
    if field == 2 or field == 3:
        return sqrt(sqrt(1.0 + l2 * l2)) / l1
    return sqrt(sqrt(1.0 + (l2 * l2) * (l2 * l2))) / l1


cdef inline double hermite(double theta, double h, double y0, double f0,
                           double y1, double f1) noexcept nogil:
    cdef double t2 = theta * theta
    cdef double t3 = t2 * theta
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + theta) * h * f0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * f1)


# Event kinds for the generic bisection helper.
cdef int EV_V_ZERO = 0
cdef int EV_SING = 1
cdef int EV_RHO_IN = 2
cdef int EV_RHO_OUT = 3
cdef int EV_LAM2 = 4


cdef double ev_fun(int kind, int field, double theta, double h,
                   double y1, double g1, double yn1, double gn1,
                   double y2, double g2, double yn2, double gn2,
                   double thresh) noexcept nogil:
    cdef double a = hermite(theta, h, y1, g1, yn1, gn1)
    cdef double b = hermite(theta, h, y2, g2, yn2, gn2)
    if kind == 0:
        return b
    if kind == 1:
        return a - thresh
    if kind == 2:
        return rho_interior(a, b) - thresh
    if kind == 3:
        return rho_chart(field, a, b) - thresh
    return fabs(b) - thresh


cdef double bisect(int kind, int field, double sig0, double h,
                   double y1, double g1, double yn1, double gn1,
                   double y2, double g2, double yn2, double gn2,
                   double thresh, double lo_val) noexcept nogil:
    cdef double lo = 0.0
    cdef double hi = 1.0
    cdef double mid, gm
    while h * (hi - lo) > BISECT_TOL * (1.0 if 1.0 > fabs(sig0) + h else fabs(sig0) + h):
        mid = 0.5 * (lo + hi)
        gm = ev_fun(kind, field, mid, h, y1, g1, yn1, gn1, y2, g2, yn2, gn2, thresh)
        if gm * lo_val > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    return hi


def integrate_raw(int field, double D, double alpha, double mu,
                  double y1, double y2, double t0, double tdir,
                  double rtol, double atol, long max_steps, double t_cap,
                  cfg, targets):
    """Compiled twin of rk_py.integrate_raw; identical contract."""
    cdef bint interior = field == 0 or field == 1
    cdef bint chart = not interior
    cdef double u_sing = -D / (2.0 * alpha)
    cdef double[::1] cfgv = np.ascontiguousarray(cfg, dtype=np.float64)
    cdef double[:, ::1] tgt = np.ascontiguousarray(
        np.asarray(targets, dtype=np.float64).reshape(-1, 6))
    cdef double sing_guard = cfgv[CFG_SING_GUARD]
    if sing_guard <= 0.0:
        sing_guard = 1e-12 * (1.0 + D)
    cdef bint stop_u_axis = cfgv[CFG_STOP_U_AXIS] != 0.0
    cdef double u_axis_sign = cfgv[CFG_U_AXIS_SIGN]
    cdef double u_axis_min_dt = cfgv[CFG_U_AXIS_MIN_DT]
    cdef bint stop_sing = cfgv[CFG_STOP_SING] != 0.0
    cdef double rho_enter = cfgv[CFG_RHO_ENTER]
    cdef double rho_exit = cfgv[CFG_RHO_EXIT]
    cdef double lam2_cap = cfgv[CFG_LAM2_CAP]
    cdef bint record_cross = cfgv[CFG_RECORD_CROSS] != 0.0

    cdef int ntgt = tgt.shape[0]
    cdef char[64] armed
    cdef int i
    for i in range(64):
        armed[i] = 0
    if ntgt > 64:
        raise ValueError("too many targets")

    cdef double h4 = 0.5 * alpha * mu
    cdef double h3 = (mu * D - 2.0 * alpha * mu) / 3.0
    cdef double h2c = -0.5 * mu * D

    # Growable output buffers.
    cdef long cap = 4096
    ts_a = np.empty(cap, dtype=np.float64)
    y1_a = np.empty(cap, dtype=np.float64)
    y2_a = np.empty(cap, dtype=np.float64)
    f1_a = np.empty(cap, dtype=np.float64)
    f2_a = np.empty(cap, dtype=np.float64)
    cdef double[::1] ts_v = ts_a
    cdef double[::1] y1_v = y1_a
    cdef double[::1] y2_v = y2_a
    cdef double[::1] f1_v = f1_a
    cdef double[::1] f2_v = f2_a
    cdef long n = 0
    cross_t = []
    cross_u = []

    cdef double f1, f2, g1, g2, sigma, h, err_old, sc1, sc2, d0, d1
    cdef int status = ST_STEP_LIMIT
    cdef int hit = -1
    cdef long steps = 0

    ts_v[0] = t0
    y1_v[0] = y1
    y2_v[0] = y2
    if field == 1 and fabs(D + 2.0 * alpha * y1) < sing_guard:
        f1_v[0] = 0.0
        f2_v[0] = 0.0
        return (ST_X_SINGULAR, -1, ts_a[:1].copy(),
                np.column_stack([y1_a[:1], y2_a[:1]]),
                np.column_stack([f1_a[:1], f2_a[:1]]), np.empty((0, 2)))
    field_eval(field, D, alpha, mu, y1, y2, &f1, &f2)
    f1_v[0] = f1
    f2_v[0] = f2
    n = 1

    sigma = 0.0
    g1 = tdir * f1
    g2 = tdir * f2

    h = cfgv[CFG_H0]
    if h <= 0.0:
        sc1 = atol + rtol * fabs(y1)
        sc2 = atol + rtol * fabs(y2)
        d0 = sqrt(0.5 * ((y1 / sc1) * (y1 / sc1) + (y2 / sc2) * (y2 / sc2)))
        d1 = sqrt(0.5 * ((g1 / sc1) * (g1 / sc1) + (g2 / sc2) * (g2 / sc2)))
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        if h > 0.1:
            h = 0.1
    err_old = 1e-4

    cdef double k11, k12, k21, k22, k31, k32, k41, k42, k51, k52, k61, k62, k71, k72
    cdef double a_, b1_, b2_, c1_, c2_, c3_, d1_, d2_, d3_, d4_, e1_, e2_, e3_, e4_, e5_
    cdef double yn1, yn2, er1, er2, err, fac, w
    cdef double sig0, sig1, gn1, gn2
    cdef double best_sig, th, sig_ev, u_ev, hv
    cdef int best_status, best_hit
    cdef double best_y1, best_y2
    cdef bint have_best
    cdef double r0, r1, gs0, gs1, c0, c1c, dist, ft1, ft2, lo_val

    while steps < max_steps:
        steps += 1
        if field == 1:
            w = D + 2.0 * alpha * y1
            if fabs(w) < sing_guard:
                status = ST_X_SINGULAR
                break

        while True:
            k11 = g1
            k12 = g2
            a_ = h * 0.2
            field_eval(field, D, alpha, mu, y1 + a_ * k11, y2 + a_ * k12, &k21, &k22)
            k21 *= tdir; k22 *= tdir
            b1_ = h * (3.0 / 40.0); b2_ = h * (9.0 / 40.0)
            field_eval(field, D, alpha, mu,
                       y1 + b1_ * k11 + b2_ * k21, y2 + b1_ * k12 + b2_ * k22, &k31, &k32)
            k31 *= tdir; k32 *= tdir
            c1_ = h * (44.0 / 45.0); c2_ = h * (-56.0 / 15.0); c3_ = h * (32.0 / 9.0)
            field_eval(field, D, alpha, mu,
                       y1 + c1_ * k11 + c2_ * k21 + c3_ * k31,
                       y2 + c1_ * k12 + c2_ * k22 + c3_ * k32, &k41, &k42)
            k41 *= tdir; k42 *= tdir
            d1_ = h * (19372.0 / 6561.0); d2_ = h * (-25360.0 / 2187.0)
            d3_ = h * (64448.0 / 6561.0); d4_ = h * (-212.0 / 729.0)
            field_eval(field, D, alpha, mu,
                       y1 + d1_ * k11 + d2_ * k21 + d3_ * k31 + d4_ * k41,
                       y2 + d1_ * k12 + d2_ * k22 + d3_ * k32 + d4_ * k42, &k51, &k52)
            k51 *= tdir; k52 *= tdir
            e1_ = h * (9017.0 / 3168.0); e2_ = h * (-355.0 / 33.0)
            e3_ = h * (46732.0 / 5247.0); e4_ = h * (49.0 / 176.0)
            e5_ = h * (-5103.0 / 18656.0)
            field_eval(field, D, alpha, mu,
                       y1 + e1_ * k11 + e2_ * k21 + e3_ * k31 + e4_ * k41 + e5_ * k51,
                       y2 + e1_ * k12 + e2_ * k22 + e3_ * k32 + e4_ * k42 + e5_ * k52,
                       &k61, &k62)
            k61 *= tdir; k62 *= tdir
            yn1 = y1 + h * ((35.0 / 384.0) * k11 + (500.0 / 1113.0) * k31
                            + (125.0 / 192.0) * k41 + (-2187.0 / 6784.0) * k51
                            + (11.0 / 84.0) * k61)
            yn2 = y2 + h * ((35.0 / 384.0) * k12 + (500.0 / 1113.0) * k32
                            + (125.0 / 192.0) * k42 + (-2187.0 / 6784.0) * k52
                            + (11.0 / 84.0) * k62)
            field_eval(field, D, alpha, mu, yn1, yn2, &k71, &k72)
            k71 *= tdir; k72 *= tdir
            er1 = h * ((71.0 / 57600.0) * k11 + (-71.0 / 16695.0) * k31
                       + (71.0 / 1920.0) * k41 + (-17253.0 / 339200.0) * k51
                       + (22.0 / 525.0) * k61 + (-1.0 / 40.0) * k71)
            er2 = h * ((71.0 / 57600.0) * k12 + (-71.0 / 16695.0) * k32
                       + (71.0 / 1920.0) * k42 + (-17253.0 / 339200.0) * k52
                       + (22.0 / 525.0) * k62 + (-1.0 / 40.0) * k72)
            sc1 = atol + rtol * (fabs(y1) if fabs(y1) > fabs(yn1) else fabs(yn1))
            sc2 = atol + rtol * (fabs(y2) if fabs(y2) > fabs(yn2) else fabs(yn2))
            err = sqrt(0.5 * ((er1 / sc1) * (er1 / sc1) + (er2 / sc2) * (er2 / sc2)))

            if err <= 1.0 or h <= 1e-14 * (1.0 if 1.0 > sigma else sigma):
                break
            fac = SAFETY * cpow(err, -PI_ALPHA)
            if fac < FAC_MIN:
                fac = FAC_MIN
            if fac > 1.0:
                fac = 1.0
            h *= fac
            if h < 1e-15 * (1.0 if 1.0 > sigma else sigma) or not isfinite(err):
                status = ST_UNDERFLOW
                hit = -1
                cr = (np.column_stack([np.asarray(cross_t), np.asarray(cross_u)])
                      if cross_t else np.empty((0, 2)))
                return (status, hit, ts_a[:n].copy(),
                        np.column_stack([y1_a[:n], y2_a[:n]]),
                        np.column_stack([f1_a[:n], f2_a[:n]]), cr)

        if not (isfinite(yn1) and isfinite(yn2)):
            status = ST_UNDERFLOW
            break

        sig0 = sigma
        sig1 = sigma + h
        gn1 = k71
        gn2 = k72

        best_sig = np.inf
        have_best = False
        best_status = 0
        best_hit = -1
        best_y1 = 0.0
        best_y2 = 0.0

        if t_cap > 0.0 and sig1 >= t_cap:
            th = (t_cap - sig0) / h
            best_sig = t_cap
            best_status = ST_T_CAP
            best_y1 = hermite(th, h, y1, g1, yn1, gn1)
            best_y2 = hermite(th, h, y2, g2, yn2, gn2)
            have_best = True

        if interior and (record_cross or stop_u_axis):
            if y2 == 0.0 and yn2 != 0.0 and sig0 == 0.0:
                pass
            elif y2 * yn2 < 0.0 or (yn2 == 0.0 and y2 != 0.0):
                lo_val = y2
                th = bisect(EV_V_ZERO, field, sig0, h, y1, g1, yn1, gn1,
                            y2, g2, yn2, gn2, 0.0, lo_val)
                sig_ev = sig0 + th * h
                u_ev = hermite(th, h, y1, g1, yn1, gn1)
                if record_cross:
                    cross_t.append(t0 + tdir * sig_ev)
                    cross_u.append(u_ev)
                if (stop_u_axis and sig_ev >= u_axis_min_dt
                        and (u_axis_sign == 0.0 or u_ev * u_axis_sign > 0.0)
                        and sig_ev < best_sig):
                    best_sig = sig_ev
                    best_status = ST_U_AXIS
                    best_y1 = u_ev
                    best_y2 = 0.0
                    best_hit = -1
                    have_best = True

        if interior and stop_sing:
            gs0 = y1 - u_sing
            gs1 = yn1 - u_sing
            if gs0 * gs1 < 0.0 or (gs1 == 0.0 and gs0 != 0.0):
                th = bisect(EV_SING, field, sig0, h, y1, g1, yn1, gn1,
                            y2, g2, yn2, gn2, u_sing, gs0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best_status = ST_SING_LINE
                    best_y1 = u_sing
                    best_y2 = hermite(th, h, y2, g2, yn2, gn2)
                    best_hit = -1
                    have_best = True

        if interior and rho_enter > 0.0:
            r0 = rho_interior(y1, y2) - rho_enter
            r1 = rho_interior(yn1, yn2) - rho_enter
            if r0 < 0.0 and r1 >= 0.0:
                th = bisect(EV_RHO_IN, field, sig0, h, y1, g1, yn1, gn1,
                            y2, g2, yn2, gn2, rho_enter, r0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best_status = ST_RHO_ENTER
                    best_y1 = hermite(th, h, y1, g1, yn1, gn1)
                    best_y2 = hermite(th, h, y2, g2, yn2, gn2)
                    best_hit = -1
                    have_best = True

        if chart and rho_exit > 0.0:
            r0 = rho_chart(field, y1, y2) - rho_exit
            r1 = rho_chart(field, yn1, yn2) - rho_exit
            if r0 > 0.0 and r1 <= 0.0:
                th = bisect(EV_RHO_OUT, field, sig0, h, y1, g1, yn1, gn1,
                            y2, g2, yn2, gn2, rho_exit, r0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best_status = ST_RHO_EXIT
                    best_y1 = hermite(th, h, y1, g1, yn1, gn1)
                    best_y2 = hermite(th, h, y2, g2, yn2, gn2)
                    best_hit = -1
                    have_best = True

        if chart and lam2_cap > 0.0:
            c0 = fabs(y2) - lam2_cap
            c1c = fabs(yn2) - lam2_cap
            if c0 < 0.0 and c1c >= 0.0:
                th = bisect(EV_LAM2, field, sig0, h, y1, g1, yn1, gn1,
                            y2, g2, yn2, gn2, lam2_cap, c0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best_status = ST_LAM2_CAP
                    best_y1 = hermite(th, h, y1, g1, yn1, gn1)
                    best_y2 = hermite(th, h, y2, g2, yn2, gn2)
                    best_hit = -1
                    have_best = True

        for i in range(ntgt):
            dist = sqrt((yn1 - tgt[i, 0]) * (yn1 - tgt[i, 0])
                        + (yn2 - tgt[i, 1]) * (yn2 - tgt[i, 1]))
            if not armed[i]:
                if dist > 2.0 * tgt[i, 2]:
                    armed[i] = 1
                continue
            if dist <= tgt[i, 2]:
                field_eval(field, D, alpha, mu, yn1, yn2, &ft1, &ft2)
                if sqrt(ft1 * ft1 + ft2 * ft2) <= tgt[i, 3]:
                    hv = ((h4 * yn1 + h3) * yn1 + h2c) * yn1 * yn1 - 0.5 * yn2 * yn2
                    if tgt[i, 5] <= 0.0 or fabs(hv - tgt[i, 4]) <= tgt[i, 5]:
                        if sig1 < best_sig:
                            best_sig = sig1
                            best_status = ST_TARGET
                            best_y1 = yn1
                            best_y2 = yn2
                            best_hit = i
                            have_best = True

        if have_best:
            field_eval(field, D, alpha, mu, best_y1, best_y2, &ft1, &ft2)
            if n >= cap:
                cap *= 2
                ts_a = np.resize(ts_a, cap); ts_v = ts_a
                y1_a = np.resize(y1_a, cap); y1_v = y1_a
                y2_a = np.resize(y2_a, cap); y2_v = y2_a
                f1_a = np.resize(f1_a, cap); f1_v = f1_a
                f2_a = np.resize(f2_a, cap); f2_v = f2_a
            ts_v[n] = t0 + tdir * best_sig
            y1_v[n] = best_y1
            y2_v[n] = best_y2
            f1_v[n] = ft1
            f2_v[n] = ft2
            n += 1
            status = best_status
            hit = best_hit
            break

        sigma = sig1
        y1 = yn1
        y2 = yn2
        g1 = gn1
        g2 = gn2
        if n >= cap:
            cap *= 2
            ts_a = np.resize(ts_a, cap); ts_v = ts_a
            y1_a = np.resize(y1_a, cap); y1_v = y1_a
            y2_a = np.resize(y2_a, cap); y2_v = y2_a
            f1_a = np.resize(f1_a, cap); f1_v = f1_a
            f2_a = np.resize(f2_a, cap); f2_v = f2_a
        ts_v[n] = t0 + tdir * sigma
        y1_v[n] = y1
        y2_v[n] = y2
        f1_v[n] = tdir * g1
        f2_v[n] = tdir * g2
        n += 1

        fac = SAFETY * cpow(err if err > 1e-16 else 1e-16, -PI_ALPHA) \
            * cpow(err_old, PI_BETA)
        if fac < FAC_MIN:
            fac = FAC_MIN
        if fac > FAC_MAX:
            fac = FAC_MAX
        h *= fac
        err_old = err if err > 1e-10 else 1e-10

    cr = (np.column_stack([np.asarray(cross_t), np.asarray(cross_u)])
          if cross_t else np.empty((0, 2)))
    return (status, hit, ts_a[:n].copy(),
            np.column_stack([y1_a[:n], y2_a[:n]]),
            np.column_stack([f1_a[:n], f2_a[:n]]), cr)
