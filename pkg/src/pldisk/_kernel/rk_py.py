"""Pure-Python integrator core (fallback twin of the compiled extension).

Dormand-Prince 5(4) embedded pair with PI step control, cubic-Hermite dense
output for event localization (bisection to 1e-12 in time), u-axis crossing
recording, radius/chart handoff events and equilibrium-arrival targets.
"""

from __future__ import annotations

import math

import numpy as np

from .common import (
    CFG_H0,
    CFG_LAM2_CAP,
    CFG_RECORD_CROSS,
    CFG_RHO_ENTER,
    CFG_RHO_EXIT,
    CFG_SING_GUARD,
    CFG_STOP_SING,
    CFG_STOP_U_AXIS,
    CFG_U_AXIS_MIN_DT,
    CFG_U_AXIS_SIGN,
    FIELD_TAU,
    FIELD_U1,
    FIELD_U2,
    FIELD_V1,
    FIELD_V2,
    FIELD_X,
    ST_LAM2_CAP,
    ST_RHO_ENTER,
    ST_RHO_EXIT,
    ST_SING_LINE,
    ST_STEP_LIMIT,
    ST_T_CAP,
    ST_TARGET,
    ST_U_AXIS,
    ST_UNDERFLOW,
    ST_X_SINGULAR,
)

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_BISECT_TOL = 1e-12


def _field(field, D, alpha, mu, y1, y2):
    if field == FIELD_TAU:
        return y2, -mu * y1 * (1.0 - y1) * (D + 2.0 * alpha * y1)
    if field == FIELD_X:
        w = D + 2.0 * alpha * y1
        return y2 / w, -mu * y1 * (1.0 - y1)
    if field == FIELD_U1:
        return (
            -y1 * y2,
            -mu * D * y1 * y1 - mu * (2.0 * alpha - D) * y1 + 2.0 * alpha * mu - 2.0 * y2 * y2,
        )
    if field == FIELD_V1:
        return (
            -y1 * y2,
            -mu * D * y1 * y1 + mu * (2.0 * alpha - D) * y1 + 2.0 * alpha * mu - 2.0 * y2 * y2,
        )
    if field == FIELD_U2:
        return (
            0.5 * mu * D * (y1 * y1 * y1) * y2
            + 0.5 * mu * (2.0 * alpha - D) * y1 * y1 * y2 * y2
            - alpha * mu * y1 * (y2 * y2 * y2),
            1.0
            + 0.5 * mu * D * y1 * y1 * y2 * y2
            + 0.5 * mu * (2.0 * alpha - D) * y1 * (y2 * y2 * y2)
            - alpha * mu * (y2 * y2) * (y2 * y2),
        )
    if field == FIELD_V2:
        return (
            0.5 * mu * D * (y1 * y1 * y1) * y2
            - 0.5 * mu * (2.0 * alpha - D) * y1 * y1 * y2 * y2
            - alpha * mu * y1 * (y2 * y2 * y2),
            1.0
            + 0.5 * mu * D * y1 * y1 * y2 * y2
            - 0.5 * mu * (2.0 * alpha - D) * y1 * (y2 * y2 * y2)
            - alpha * mu * (y2 * y2) * (y2 * y2),
        )
    raise ValueError(f"unknown field code {field}")


def _rho_interior(u, v):
    return math.sqrt(math.sqrt(u * u * u * u + v * v))


def _rho_chart(field, l1, l2):
    if field == FIELD_U1 or field == FIELD_V1:
        return math.sqrt(math.sqrt(1.0 + l2 * l2)) / l1
    return math.sqrt(math.sqrt(1.0 + (l2 * l2) * (l2 * l2))) / l1


def _hermite(theta, h, y0, f0, y1, f1):
    # Cubic Hermite value at fraction theta of a step of (signed) length h.
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate_raw(field, D, alpha, mu, y1, y2, t0, tdir, rtol, atol,
                  max_steps, t_cap, cfg, targets):
    """Integrate one segment; see common.py for the cfg/targets layout.

    Returns (status, hit_target, ts, ys, fs, crossings) where ts is the
    reported (signed) time t0 + tdir*sigma, fs holds the true field values
    and crossings is an (m, 2) array of (t, u) u-axis crossings.
    """
    D = float(D)
    alpha = float(alpha)
    mu = float(mu)
    y1 = float(y1)
    y2 = float(y2)
    t0 = float(t0)
    tdir = float(tdir)
    interior = field == FIELD_TAU or field == FIELD_X
    chart = not interior
    u_sing = -D / (2.0 * alpha)
    sing_guard = cfg[CFG_SING_GUARD]
    if sing_guard <= 0.0:
        sing_guard = 1e-12 * (1.0 + D)
    stop_u_axis = cfg[CFG_STOP_U_AXIS] != 0.0
    u_axis_sign = cfg[CFG_U_AXIS_SIGN]
    u_axis_min_dt = cfg[CFG_U_AXIS_MIN_DT]
    stop_sing = cfg[CFG_STOP_SING] != 0.0
    rho_enter = cfg[CFG_RHO_ENTER]
    rho_exit = cfg[CFG_RHO_EXIT]
    lam2_cap = cfg[CFG_LAM2_CAP]
    record_cross = cfg[CFG_RECORD_CROSS] != 0.0

    ntgt = len(targets)
    armed = [False] * ntgt

    # H(u, v) coefficients for the interior first-integral test.
    h4 = 0.5 * alpha * mu
    h3 = (mu * D - 2.0 * alpha * mu) / 3.0
    h2 = -0.5 * mu * D

    def h_value(u, v):
        return ((h4 * u + h3) * u + h2) * u * u - 0.5 * v * v

    ts = [t0]
    y1s = [y1]
    y2s = [y2]
    if field == FIELD_X and abs(D + 2.0 * alpha * y1) < sing_guard:
        f1s = [0.0]
        f2s = [0.0]
        return (ST_X_SINGULAR, -1, np.asarray(ts), np.column_stack([y1s, y2s]),
                np.column_stack([f1s, f2s]), np.empty((0, 2)))
    f1, f2 = _field(field, D, alpha, mu, y1, y2)
    f1s = [f1]
    f2s = [f2]
    cross_t = []
    cross_u = []

    sigma = 0.0
    # Effective RHS is tdir * field; Hermite derivatives below use it.
    g1, g2 = tdir * f1, tdir * f2

    # Automatic initial step (simplified Hairer start).
    h = cfg[CFG_H0]
    if h <= 0.0:
        sc1 = atol + rtol * abs(y1)
        sc2 = atol + rtol * abs(y2)
        d0 = math.sqrt(0.5 * ((y1 / sc1) ** 2 + (y2 / sc2) ** 2))
        d1 = math.sqrt(0.5 * ((g1 / sc1) ** 2 + (g2 / sc2) ** 2))
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, 0.1)
    err_old = 1e-4

    status = ST_STEP_LIMIT
    hit = -1
    steps = 0

    def finalize(sig_ev, yy1, yy2, st, hit_i=-1):
        nonlocal status, hit
        ff1, ff2 = _field(field, D, alpha, mu, yy1, yy2)
        ts.append(t0 + tdir * sig_ev)
        y1s.append(yy1)
        y2s.append(yy2)
        f1s.append(ff1)
        f2s.append(ff2)
        status = st
        hit = hit_i

    def bisect(sig0, hh, gfun, lo_val):
        # Root of gfun(theta) in (0, 1]; lo_val = gfun(0) sign reference.
        lo, hi = 0.0, 1.0
        while hh * (hi - lo) > _BISECT_TOL * max(1.0, abs(sig0) + hh):
            mid = 0.5 * (lo + hi)
            if gfun(mid) * lo_val > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-17:
                break
        return hi

    while steps < max_steps:
        steps += 1
        if field == FIELD_X:
            w = D + 2.0 * alpha * y1
            if abs(w) < sing_guard:
                status = ST_X_SINGULAR
                break

        # -- one Dormand-Prince step -------------------------------------
        while True:
            k11, k12 = g1, g2
            a = h * 0.2
            k21, k22 = _field(field, D, alpha, mu, y1 + a * k11, y2 + a * k12)
            k21 *= tdir
            k22 *= tdir
            b1_, b2_ = h * (3.0 / 40.0), h * (9.0 / 40.0)
            k31, k32 = _field(field, D, alpha, mu,
                              y1 + b1_ * k11 + b2_ * k21,
                              y2 + b1_ * k12 + b2_ * k22)
            k31 *= tdir
            k32 *= tdir
            c1_, c2_, c3_ = h * (44.0 / 45.0), h * (-56.0 / 15.0), h * (32.0 / 9.0)
            k41, k42 = _field(field, D, alpha, mu,
                              y1 + c1_ * k11 + c2_ * k21 + c3_ * k31,
                              y2 + c1_ * k12 + c2_ * k22 + c3_ * k32)
            k41 *= tdir
            k42 *= tdir
            d1_ = h * (19372.0 / 6561.0)
            d2_ = h * (-25360.0 / 2187.0)
            d3_ = h * (64448.0 / 6561.0)
            d4_ = h * (-212.0 / 729.0)
            k51, k52 = _field(field, D, alpha, mu,
                              y1 + d1_ * k11 + d2_ * k21 + d3_ * k31 + d4_ * k41,
                              y2 + d1_ * k12 + d2_ * k22 + d3_ * k32 + d4_ * k42)
            k51 *= tdir
            k52 *= tdir
            e1_ = h * (9017.0 / 3168.0)
            e2_ = h * (-355.0 / 33.0)
            e3_ = h * (46732.0 / 5247.0)
            e4_ = h * (49.0 / 176.0)
            e5_ = h * (-5103.0 / 18656.0)
            k61, k62 = _field(field, D, alpha, mu,
                              y1 + e1_ * k11 + e2_ * k21 + e3_ * k31 + e4_ * k41 + e5_ * k51,
                              y2 + e1_ * k12 + e2_ * k22 + e3_ * k32 + e4_ * k42 + e5_ * k52)
            k61 *= tdir
            k62 *= tdir
            # 5th-order solution.
            w1 = 35.0 / 384.0
            w3 = 500.0 / 1113.0
            w4 = 125.0 / 192.0
            w5 = -2187.0 / 6784.0
            w6 = 11.0 / 84.0
            yn1 = y1 + h * (w1 * k11 + w3 * k31 + w4 * k41 + w5 * k51 + w6 * k61)
            yn2 = y2 + h * (w1 * k12 + w3 * k32 + w4 * k42 + w5 * k52 + w6 * k62)
            k71, k72 = _field(field, D, alpha, mu, yn1, yn2)
            k71 *= tdir
            k72 *= tdir
            # Embedded 4th-order error (b - bhat).
            q1 = 71.0 / 57600.0
            q3 = -71.0 / 16695.0
            q4 = 71.0 / 1920.0
            q5 = -17253.0 / 339200.0
            q6 = 22.0 / 525.0
            q7 = -1.0 / 40.0
            er1 = h * (q1 * k11 + q3 * k31 + q4 * k41 + q5 * k51 + q6 * k61 + q7 * k71)
            er2 = h * (q1 * k12 + q3 * k32 + q4 * k42 + q5 * k52 + q6 * k62 + q7 * k72)
            sc1 = atol + rtol * max(abs(y1), abs(yn1))
            sc2 = atol + rtol * max(abs(y2), abs(yn2))
            err = math.sqrt(0.5 * ((er1 / sc1) ** 2 + (er2 / sc2) ** 2))

            if err <= 1.0 or h <= 1e-14 * max(1.0, sigma):
                break
            fac = _SAFETY * err ** (-_PI_ALPHA)
            h *= max(_FAC_MIN, min(1.0, fac))
            if h < 1e-15 * max(1.0, sigma) or not math.isfinite(err):
                return (ST_UNDERFLOW, -1, np.asarray(ts),
                        np.column_stack([y1s, y2s]), np.column_stack([f1s, f2s]),
                        np.column_stack([cross_t, cross_u]) if cross_t else np.empty((0, 2)))

        if not (math.isfinite(yn1) and math.isfinite(yn2)):
            status = ST_UNDERFLOW
            break

        sig0 = sigma
        sig1 = sigma + h
        gn1, gn2 = k71, k72  # FSAL: derivative at the new point (tdir-scaled)

        herm1 = lambda th: _hermite(th, h, y1, g1, yn1, gn1)
        herm2 = lambda th: _hermite(th, h, y2, g2, yn2, gn2)

        # -- event scan over the accepted step ---------------------------
        best_sig = math.inf
        best = None  # (status, y1, y2, hit)

        if t_cap > 0.0 and sig1 >= t_cap:
            th = (t_cap - sig0) / h
            best_sig = t_cap
            best = (ST_T_CAP, herm1(th), herm2(th), -1)

        if interior and (record_cross or stop_u_axis):
            if (y2 == 0.0 and yn2 != 0.0 and sig0 == 0.0):
                pass  # leaving the axis at launch is not a crossing
            elif y2 * yn2 < 0.0 or (yn2 == 0.0 and y2 != 0.0):
                lo_val = y2
                th = bisect(sig0, h, herm2, lo_val)
                sig_ev = sig0 + th * h
                u_ev = herm1(th)
                if record_cross:
                    cross_t.append(t0 + tdir * sig_ev)
                    cross_u.append(u_ev)
                if (stop_u_axis and sig_ev >= u_axis_min_dt
                        and (u_axis_sign == 0.0 or u_ev * u_axis_sign > 0.0)
                        and sig_ev < best_sig):
                    best_sig = sig_ev
                    best = (ST_U_AXIS, u_ev, 0.0, -1)

        if interior and stop_sing:
            gs0 = y1 - u_sing
            gs1 = yn1 - u_sing
            if gs0 * gs1 < 0.0 or (gs1 == 0.0 and gs0 != 0.0):
                th = bisect(sig0, h, lambda t: herm1(t) - u_sing, gs0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best = (ST_SING_LINE, u_sing, herm2(th), -1)

        if interior and rho_enter > 0.0:
            r0 = _rho_interior(y1, y2) - rho_enter
            r1 = _rho_interior(yn1, yn2) - rho_enter
            if r0 < 0.0 <= r1:
                th = bisect(sig0, h, lambda t: _rho_interior(herm1(t), herm2(t)) - rho_enter, r0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best = (ST_RHO_ENTER, herm1(th), herm2(th), -1)

        if chart and rho_exit > 0.0:
            r0 = _rho_chart(field, y1, y2) - rho_exit
            r1 = _rho_chart(field, yn1, yn2) - rho_exit
            if r0 > 0.0 >= r1:
                th = bisect(sig0, h, lambda t: _rho_chart(field, herm1(t), herm2(t)) - rho_exit, r0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best = (ST_RHO_EXIT, herm1(th), herm2(th), -1)

        if chart and lam2_cap > 0.0:
            c0 = abs(y2) - lam2_cap
            c1c = abs(yn2) - lam2_cap
            if c0 < 0.0 <= c1c:
                th = bisect(sig0, h, lambda t: abs(herm2(t)) - lam2_cap, c0)
                sig_ev = sig0 + th * h
                if sig_ev < best_sig:
                    best_sig = sig_ev
                    best = (ST_LAM2_CAP, herm1(th), herm2(th), -1)

        # Equilibrium arrival, tested at the step end only.
        for i in range(ntgt):
            c1t = targets[i][0]
            c2t = targets[i][1]
            pos_tol = targets[i][2]
            dist = math.sqrt((yn1 - c1t) ** 2 + (yn2 - c2t) ** 2)
            if not armed[i]:
                if dist > 2.0 * pos_tol:
                    armed[i] = True
                continue
            if dist <= pos_tol:
                ft1, ft2 = _field(field, D, alpha, mu, yn1, yn2)
                if math.sqrt(ft1 * ft1 + ft2 * ft2) <= targets[i][3]:
                    h_tol = targets[i][5]
                    if h_tol <= 0.0 or abs(h_value(yn1, yn2) - targets[i][4]) <= h_tol:
                        if sig1 < best_sig:
                            best_sig = sig1
                            best = (ST_TARGET, yn1, yn2, i)

        if best is not None:
            finalize(best_sig, best[1], best[2], best[0], best[3])
            break

        # -- accept -------------------------------------------------------
        sigma = sig1
        y1, y2 = yn1, yn2
        g1, g2 = gn1, gn2
        ts.append(t0 + tdir * sigma)
        y1s.append(y1)
        y2s.append(y2)
        f1s.append(tdir * g1)
        f2s.append(tdir * g2)

        fac = _SAFETY * max(err, 1e-16) ** (-_PI_ALPHA) * err_old ** _PI_BETA
        h *= max(_FAC_MIN, min(_FAC_MAX, fac))
        err_old = max(err, 1e-10)

    crossings = (np.column_stack([cross_t, cross_u]) if cross_t
                 else np.empty((0, 2)))
    return (status, hit, np.asarray(ts), np.column_stack([y1s, y2s]),
            np.column_stack([f1s, f2s]), crossings)
