"""Orbit computation: adaptive integration with events, handoff between the
interior and the charts at infinity, saddle-branch shooting, physical-space
reparameterization and asymptotic-rate fitting.

An Orbit is a list of segments, each in one coordinate frame with its own
local clock (tau in the interior, the desingularized s in a chart), plus a
shared global tau axis. Reparameterization adds physical-space stamps x via
quadrature of dx/dtau = D + 2*alpha*u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel as K
from .charts import ChartId, ChartPoint, chart_for_point, from_chart, to_chart
from .equilibria import (CANONICAL_CORNER, Stability, all_equilibria,
                         equilibrium_by_id)
from .errors import (FitDegenerateError, InsufficientWindowError,
                     NonPeriodicError, SingularLineError, StepLimitError)
from .model import (ModelParams, PhasePoint, conserved_H, conserved_H_scale,
                    potential_U)

__all__ = [
    "Event",
    "Segment",
    "Orbit",
    "ArrivalSpec",
    "StopSpec",
    "integrate",
    "shoot_saddle",
    "trace_through",
    "detect_period",
    "constant_orbit",
    "reparameterize_to_x",
    "AsymptoticFit",
    "fit_asymptotics",
]

_FIELD_OF_CHART = {ChartId.U1: K.FIELD_U1, ChartId.V1: K.FIELD_V1,
                   ChartId.U2: K.FIELD_U2, ChartId.V2: K.FIELD_V2}
_CHART_CORNER_IDS = {ChartId.U1: ("E3", "E4"), ChartId.V1: ("E5", "E6"),
                     ChartId.U2: ("E7", "E8"), ChartId.V2: ("E9", "E10")}


@dataclass(frozen=True)
class Event:
    kind: str           # hit_u_axis | hit_singular_line | reached_equilibrium |
                        # entered_chart | left_chart | closed_loop | step_limit
    time: float         # global tau (x after reparameterization)
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "time": self.time, "data": self.data}


@dataclass
class Segment:
    frame: str          # "interior" or chart name
    t: np.ndarray       # local clock, strictly monotone in integration order
    y: np.ndarray       # (n, 2) states
    f: np.ndarray       # (n, 2) field values at the states
    tau: np.ndarray     # global tau stamps
    x: np.ndarray | None = None

    def reversed(self) -> "Segment":
        return Segment(self.frame, self.t[::-1].copy(), self.y[::-1].copy(),
                       self.f[::-1].copy(), self.tau[::-1].copy(),
                       None if self.x is None else self.x[::-1].copy())

    def interior_states(self, p: ModelParams) -> np.ndarray:
        """(n, 2) interior (u, v) rows; chart states are mapped through the
        chart transform (lambda1 > 0 on integrated segments)."""
        if self.frame == "interior":
            return self.y
        chart = ChartId.of(self.frame)
        l1 = self.y[:, 0]
        l2 = self.y[:, 1]
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if chart is ChartId.U1:
                u = 1.0 / l1
                v = l2 / (l1 * l1)
            elif chart is ChartId.V1:
                u = -1.0 / l1
                v = -l2 / (l1 * l1)
            elif chart is ChartId.U2:
                u = l2 / l1
                v = 1.0 / (l1 * l1)
            else:
                u = -l2 / l1
                v = -1.0 / (l1 * l1)
        return np.column_stack([u, v])


def _cumulative_quad(t: np.ndarray, g: np.ndarray, gp: np.ndarray) -> np.ndarray:
    """Cumulative integral of g over t with Hermite-corrected trapezoid
    increments (exact for cubics, matching the integrator's dense output)."""
    out = np.empty_like(t)
    out[0] = 0.0
    dt = np.diff(t)
    inc = 0.5 * dt * (g[:-1] + g[1:]) + dt * dt / 12.0 * (gp[:-1] - gp[1:])
    np.cumsum(inc, out=out[1:])
    return out


def _hermite_interp(t, vals, derivs, tq):
    """Cubic Hermite interpolation of sampled (vals, derivs) at query times."""
    t = np.asarray(t)
    order = 1 if t[-1] >= t[0] else -1
    ts = t[::order]
    vs = np.asarray(vals)[::order]
    ds = np.asarray(derivs)[::order]
    idx = np.clip(np.searchsorted(ts, tq) - 1, 0, len(ts) - 2)
    h = ts[idx + 1] - ts[idx]
    th = np.where(h != 0.0, (np.asarray(tq) - ts[idx]) / np.where(h == 0, 1, h), 0.0)
    t2 = th * th
    t3 = t2 * th
    return ((2 * t3 - 3 * t2 + 1) * vs[idx] + (t3 - 2 * t2 + th) * h * ds[idx]
            + (-2 * t3 + 3 * t2) * vs[idx + 1] + (t3 - t2) * h * ds[idx + 1])


@dataclass
class Orbit:
    mode: str                      # "tau" | "s" | "x"
    params: ModelParams
    segments: list[Segment]
    events: list[Event]
    origin: str
    direction: str                 # forward | backward | both
    left_id: str | None = None     # equilibrium limit at the early-time end
    right_id: str | None = None    # equilibrium limit at the late-time end
    x_minus: float | None = None
    x_plus: float | None = None

    # -- views ------------------------------------------------------------
    @property
    def start(self) -> np.ndarray:
        return self.segments[0].y[0]

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].y[-1]

    @property
    def terminal_event(self) -> Event | None:
        return self.events[-1] if self.events else None

    def time_span(self) -> tuple[float, float]:
        taus = [s.tau for s in self.segments]
        lo = min(a.min() for a in taus)
        hi = max(a.max() for a in taus)
        return lo, hi

    def canonical_left(self) -> str | None:
        return CANONICAL_CORNER.get(self.left_id, self.left_id)

    def canonical_right(self) -> str | None:
        return CANONICAL_CORNER.get(self.right_id, self.right_id)

    def u_axis_hits(self) -> list[Event]:
        return [e for e in self.events if e.kind == "hit_u_axis"]

    def target_or_none(self) -> str | None:
        ev = next((e for e in reversed(self.events)
                   if e.kind == "reached_equilibrium"), None)
        return ev.data["id"] if ev else None

    def interior_samples(self) -> tuple[np.ndarray, np.ndarray]:
        """(tau, (u, v)) over all segments, chart samples mapped to interior."""
        taus = np.concatenate([s.tau for s in self.segments])
        uv = np.vstack([s.interior_states(self.params) for s in self.segments])
        return taus, uv

    def h_values(self) -> np.ndarray:
        _, uv = self.interior_samples()
        p = self.params
        return np.array([conserved_H(p, (u, v)) for u, v in uv])

    def h_drift(self) -> tuple[float, float]:
        """(absolute drift over the bounded region rho<=5,
            scale-relative drift over all samples).

        The reference sample is the one of smallest term magnitude: near
        infinity the quartic terms cancel catastrophically, so H evaluated
        there carries rounding noise far above the conserved level and must
        not serve as the baseline.
        """
        p = self.params
        _, uv = self.interior_samples()
        h = np.array([conserved_H(p, (u, v)) for u, v in uv])
        scale = np.array([conserved_H_scale(p, (u, v)) for u, v in uv])
        ref = int(np.argmin(scale))
        h0 = h[ref]
        rel = float(np.max(np.abs(h - h0) / (1.0 + abs(h0) + scale)))
        with np.errstate(over="ignore"):
            rho = (uv[:, 0] ** 4 + uv[:, 1] ** 2) ** 0.25
        core = rho <= 5.0
        abs_core = float(np.max(np.abs(h[core] - h0))) if core.any() else 0.0
        return abs_core, rel

    # -- serialization ------------------------------------------------------
    def csv_rows(self):
        p = self.params
        for seg in self.segments:
            times = seg.x if self.mode == "x" else seg.tau
            uv = seg.interior_states(p)
            for i in range(len(seg.t)):
                yield (times[i], seg.frame, seg.y[i, 0], seg.y[i, 1],
                       conserved_H(p, (uv[i, 0], uv[i, 1])))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,frame,c1,c2,H\n")
            for t, frame, c1, c2, h in self.csv_rows():
                fh.write(f"{t:.17g},{frame},{c1:.17g},{c2:.17g},{h:.17g}\n")

    @classmethod
    def from_csv(cls, path, params: ModelParams, mode: str = "tau") -> "Orbit":
        """Rebuild an orbit from its CSV dump. The time column is the dump
        mode's clock; field values are re-derived from the states. Chart
        segments lose their private s clock (the CSV stores the shared axis)."""
        from .model import field_tau
        from .charts import chart_field_raw

        rows = []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "time,frame,c1,c2,H":
                raise ValueError(f"unexpected CSV header {header!r}")
            for line in fh:
                t, frame, c1, c2, h = line.strip().split(",")
                rows.append((float(t), frame, float(c1), float(c2), float(h)))
        segs = []
        i = 0
        while i < len(rows):
            j = i
            frame = rows[i][1]
            while j < len(rows) and rows[j][1] == frame:
                j += 1
            t = np.array([r[0] for r in rows[i:j]])
            y = np.array([[r[2], r[3]] for r in rows[i:j]])
            if frame == "interior":
                f = np.array([field_tau(params, (a, b)) for a, b in y])
            else:
                f = np.array([chart_field_raw(ChartId.of(frame), a, b, params)
                              for a, b in y])
            segs.append(Segment(frame, t.copy(), y, f, t.copy(),
                                t.copy() if mode == "x" else None))
            i = j
        return cls(mode, params, segs, [], origin=f"csv:{path}", direction="forward")

    def to_json(self) -> dict:
        out = {
            "mode": self.mode,
            "origin": self.origin,
            "direction": self.direction,
            "params": self.params.to_json(),
            "left": self.left_id,
            "right": self.right_id,
            "events": [e.to_json() for e in self.events],
            "n_samples": int(sum(len(s.t) for s in self.segments)),
            "frames": [s.frame for s in self.segments],
        }
        if self.mode == "x":
            out["x_minus"] = _json_float(self.x_minus)
            out["x_plus"] = _json_float(self.x_plus)
        return out


def _json_float(v):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass(frozen=True)
class ArrivalSpec:
    """Equilibrium-arrival thresholds. Nodes use position+field; saddles use
    a coarser ball certified by the first integral (position alone cannot
    reach 1e-8 on a separatrix in double precision)."""

    node_pos_tol: float = 1e-8
    node_field_tol: float = 1e-8
    saddle_ball: float = 1e-4
    saddle_h_rel: float = 1e-9


@dataclass(frozen=True)
class StopSpec:
    targets: tuple[str, ...] = ()
    stop_on_u_axis: bool = False
    u_axis_sign: float = 0.0
    u_axis_min_dt: float = 1e-3
    stop_on_singular_line: bool = False
    arrival: ArrivalSpec = field(default_factory=ArrivalSpec)


def _interior_target_rows(p: ModelParams, stop: StopSpec):
    rows, ids = [], []
    eqs = {e.id: e for e in all_equilibria(p)[:3]}
    for tid in stop.targets:
        if tid not in eqs:
            continue
        eq = eqs[tid]
        loc = eq.location
        scale = 1.0 + math.hypot(*loc)
        if eq.stability is Stability.SADDLE:
            h_ref = conserved_H(p, loc)
            rows.append([loc[0], loc[1], stop.arrival.saddle_ball * scale,
                         1e18, h_ref, stop.arrival.saddle_h_rel * (1.0 + abs(h_ref))])
        else:
            rows.append([loc[0], loc[1], stop.arrival.node_pos_tol * scale,
                         stop.arrival.node_field_tol, 0.0, -1.0])
        ids.append(tid)
    return rows, ids


def _chart_target_rows(p: ModelParams, chart: ChartId, stop: StopSpec):
    rows, ids = [], []
    canonical = {CANONICAL_CORNER.get(t, t) for t in stop.targets}
    eqs = {e.id: e for e in all_equilibria(p)}
    for cid in _CHART_CORNER_IDS[chart]:
        if cid in stop.targets or CANONICAL_CORNER[cid] in canonical:
            loc = eqs[cid].location
            scale = 1.0 + math.hypot(*loc)
            rows.append([loc[0], loc[1], stop.arrival.node_pos_tol * scale,
                         stop.arrival.node_field_tol, 0.0, -1.0])
            ids.append(cid)
    return rows, ids


def _chart_tau(seg_t, seg_y, seg_f, tau0):
    # dtau/ds = lambda1; derivative of the integrand is the field component.
    return tau0 + _cumulative_quad(seg_t, seg_y[:, 0], seg_f[:, 0])


def integrate(p: ModelParams, start, *, frame="interior", direction="forward",
              stop: StopSpec | None = None, rtol=1e-10, atol=1e-12,
              max_steps=10 ** 6, t_cap=400.0, chart_handoff=True,
              rho_enter=20.0, rho_exit=15.0, chart_s_cap=None,
              origin="", source_id=None,
              allow_equilibrium_start=False) -> Orbit:
    """Track one orbit of the rescaled system, switching to/from the charts
    at infinity as the quasi-homogeneous radius crosses the handoff band.

    The returned orbit is in tau mode; chart segments keep their own s clock
    and carry global tau stamps from the quadrature of dtau/ds = lambda1.
    """
    stop = stop or StopSpec()
    if isinstance(start, PhasePoint):
        y = np.array([start.u, start.v])
        cur_frame = "interior"
    elif isinstance(start, ChartPoint):
        y = np.array([start.lambda1, start.lambda2])
        cur_frame = start.chart.value
    else:
        y = np.asarray(start, dtype=float)
        cur_frame = frame if isinstance(frame, str) else ChartId.of(frame).value

    if cur_frame == "interior" and not allow_equilibrium_start:
        from .model import field_tau

        fv = field_tau(p, (y[0], y[1]))
        if math.hypot(*fv) < 1e-14:
            raise ValueError(
                "start lies at an equilibrium; supply a branch offset "
                "(see shoot_saddle) or pass allow_equilibrium_start=True")

    if t_cap <= 0.0:
        raise ValueError(f"t_cap must be positive, got {t_cap}")
    tdir = +1.0 if direction == "forward" else -1.0
    lam2_cap_base = 1.25 * max(1.0, p.sqrt_alpha_mu, p.vertical_chart_level)
    segments: list[Segment] = []
    events: list[Event] = []
    tau_now = 0.0
    status = None
    target_hit: str | None = None
    tau_budget = t_cap
    if chart_s_cap is None:
        chart_s_cap = 200.0 * (1.0 + 1.0 / min(p.sqrt_alpha_mu,
                                               p.vertical_chart_level))

    for _ in range(64):
        if tau_budget <= 1e-12:
            events.append(Event("step_limit", tau_now, {"reason": "time"}))
            status = "limit"
            break
        if cur_frame == "interior":
            rho = (y[0] ** 4 + y[1] ** 2) ** 0.25
            if chart_handoff and rho >= rho_enter:
                chart = chart_for_point(y[0], y[1])
                cpt = to_chart(chart, (y[0], y[1]))
                events.append(Event("entered_chart", tau_now,
                                    {"chart": chart.value}))
                cur_frame = chart.value
                y = np.array([cpt.lambda1, cpt.lambda2])
                continue
            cfg = [0.0] * K.NCFG
            cfg[K.CFG_STOP_U_AXIS] = 1.0 if stop.stop_on_u_axis else 0.0
            cfg[K.CFG_U_AXIS_SIGN] = stop.u_axis_sign
            cfg[K.CFG_U_AXIS_MIN_DT] = stop.u_axis_min_dt
            cfg[K.CFG_STOP_SING] = 1.0 if stop.stop_on_singular_line else 0.0
            cfg[K.CFG_RHO_ENTER] = rho_enter if chart_handoff else 0.0
            cfg[K.CFG_RECORD_CROSS] = 1.0
            rows, ids = _interior_target_rows(p, stop)
            tgt = np.asarray(rows, dtype=float).reshape(-1, 6)
            st, hit, ts, ys, fs, crossings = K.integrate_raw(
                K.FIELD_TAU, p.D, p.alpha, p.mu, y[0], y[1], tau_now, tdir,
                rtol, atol, max_steps, tau_budget, cfg, tgt)
            seg = Segment("interior", ts, ys, fs, ts.copy())
            segments.append(seg)
            for ct, cu in crossings:
                events.append(Event("hit_u_axis", float(ct), {"u": float(cu)}))
            tau_budget -= abs(ts[-1] - tau_now)
            tau_now = float(ts[-1])
            y = ys[-1].copy()
            if st == K.ST_TARGET:
                target_hit = ids[hit]
                events.append(Event("reached_equilibrium", tau_now,
                                    {"id": target_hit,
                                     "canonical": CANONICAL_CORNER.get(target_hit,
                                                                       target_hit)}))
                status = "target"
                break
            if st == K.ST_RHO_ENTER:
                continue
            if st == K.ST_U_AXIS:
                status = "u_axis"
                break
            if st == K.ST_SING_LINE:
                events.append(Event("hit_singular_line", tau_now, {}))
                status = "singular"
                break
            if st in (K.ST_T_CAP, K.ST_STEP_LIMIT):
                events.append(Event("step_limit", tau_now,
                                    {"reason": "time" if st == K.ST_T_CAP else "steps"}))
                status = "limit"
                break
            if st == K.ST_UNDERFLOW:
                raise StepLimitError("integrator step underflow (interior)")
        else:
            chart = ChartId.of(cur_frame)
            cfg = [0.0] * K.NCFG
            cfg[K.CFG_RHO_EXIT] = rho_exit if chart_handoff else 0.0
            cfg[K.CFG_LAM2_CAP] = lam2_cap_base
            rows, ids = _chart_target_rows(p, chart, stop)
            tgt = np.asarray(rows, dtype=float).reshape(-1, 6)
            st, hit, ts, ys, fs, _ = K.integrate_raw(
                _FIELD_OF_CHART[chart], p.D, p.alpha, p.mu, y[0], y[1], 0.0,
                tdir, rtol, atol, max_steps, chart_s_cap, cfg, tgt)
            tau_seg = _chart_tau(ts, ys, fs, tau_now)
            segments.append(Segment(chart.value, ts, ys, fs, tau_seg))
            tau_budget -= abs(tau_seg[-1] - tau_now)
            tau_now = float(tau_seg[-1])
            y = ys[-1].copy()
            if st == K.ST_TARGET:
                target_hit = ids[hit]
                events.append(Event("reached_equilibrium", tau_now,
                                    {"id": target_hit,
                                     "canonical": CANONICAL_CORNER[target_hit]}))
                status = "target"
                break
            if st == K.ST_RHO_EXIT:
                pt = from_chart(ChartPoint(chart, y[0], y[1]))
                events.append(Event("left_chart", tau_now, {"chart": chart.value}))
                cur_frame = "interior"
                y = np.array([pt.u, pt.v])
                continue
            if st == K.ST_LAM2_CAP:
                new_chart, l1n, l2n = _chart_transfer(chart, y[0], y[1])
                events.append(Event("left_chart", tau_now, {"chart": chart.value}))
                events.append(Event("entered_chart", tau_now,
                                    {"chart": new_chart.value}))
                cur_frame = new_chart.value
                y = np.array([l1n, l2n])
                continue
            if st in (K.ST_T_CAP, K.ST_STEP_LIMIT):
                events.append(Event("step_limit", tau_now,
                                    {"reason": "time" if st == K.ST_T_CAP else "steps"}))
                status = "limit"
                break
            if st == K.ST_UNDERFLOW:
                raise StepLimitError(f"integrator step underflow in chart {chart.value}")
    if status is None:
        events.append(Event("step_limit", tau_now, {"reason": "segments"}))

    orbit = Orbit("tau", p, segments, events,
                  origin or f"ic({segments[0].y[0, 0]:g},{segments[0].y[0, 1]:g})",
                  direction,
                  left_id=(target_hit if direction == "backward" else source_id),
                  right_id=(target_hit if direction == "forward" else source_id))
    return orbit


def _chart_transfer(chart: ChartId, l1: float, l2: float):
    """Direct chart-to-chart handoff when the direction rotates past a corner
    (|lambda2| cap). Avoids round-tripping through huge interior values."""
    s = math.copysign(1.0, l2)
    a = abs(l2)
    if chart in (ChartId.U1, ChartId.V1):
        r = math.sqrt(a)
        new = {(ChartId.U1, 1.0): ChartId.U2, (ChartId.U1, -1.0): ChartId.V2,
               (ChartId.V1, 1.0): ChartId.V2, (ChartId.V1, -1.0): ChartId.U2}[(chart, s)]
        return new, l1 / r, s / r
    new = {(ChartId.U2, 1.0): ChartId.U1, (ChartId.U2, -1.0): ChartId.V1,
           (ChartId.V2, 1.0): ChartId.V1, (ChartId.V2, -1.0): ChartId.U1}[(chart, s)]
    return new, l1 / a, s / (l2 * l2)


def merge_orbits(back: Orbit, fwd: Orbit, origin="") -> Orbit:
    """Join a backward orbit and a forward orbit from the same seed into one
    time-ordered orbit."""
    segs = [s.reversed() for s in reversed(back.segments)] + list(fwd.segments)
    events = sorted(back.events + fwd.events, key=lambda e: e.time)
    return Orbit("tau", fwd.params, segs, events,
                 origin or f"merge({back.origin},{fwd.origin})", "both",
                 left_id=back.target_or_none(), right_id=fwd.target_or_none())


_ALL_TARGETS = ("E1", "E2", "E3", "E4", "E5", "E6")


def shoot_saddle(p: ModelParams, eq, branch: str, epsilon: float | None = None,
                 *, stop_targets=_ALL_TARGETS, arrival: ArrivalSpec | None = None,
                 rtol=1e-10, atol=1e-12, t_cap=400.0) -> Orbit:
    """Launch an orbit along one manifold branch of a saddle (E1/E2) or the
    interior-pointing slow direction of an infinity node.

    Interior launches are projected onto the saddle's first-integral level,
    an O(epsilon^2) correction that keeps separatrices on their exact level.
    Unstable branches integrate forward, stable ones backward.
    """
    if isinstance(eq, str):
        eq = equilibrium_by_id(p, eq)
    branch_key = branch.lower().replace("-", "_")
    if not branch_key.startswith(("unstable", "stable")):
        raise ValueError(f"unknown branch {branch!r}")
    if "_" not in branch_key:
        raise ValueError(f"branch must be <kind>_<plus|minus>, got {branch!r}")
    vec, direction = eq.branch_direction(branch_key)
    if epsilon is None:
        epsilon = 1e-7 * (1.0 + math.hypot(*eq.location))
    y0 = np.asarray(eq.location) + epsilon * vec

    if eq.frame == "interior":
        h_ref = conserved_H(p, eq.location)
        gap = 2.0 * (potential_U(p, y0[0]) - h_ref)
        if gap > 0.0:
            y0[1] = math.copysign(math.sqrt(gap), vec[1] if vec[1] != 0.0 else 1.0)
        start_frame = "interior"
    else:
        start_frame = eq.frame

    stop = StopSpec(targets=tuple(stop_targets),
                    arrival=arrival or ArrivalSpec())
    orbit = integrate(p, y0, frame=start_frame, direction=direction, stop=stop,
                      rtol=rtol, atol=atol, t_cap=t_cap,
                      origin=f"{eq.id}:{branch_key}", source_id=eq.id)
    return orbit


def trace_through(p: ModelParams, point, *, stop_targets=_ALL_TARGETS,
                  arrival: ArrivalSpec | None = None, rtol=1e-10, atol=1e-12,
                  t_cap=400.0) -> Orbit:
    """Integrate both time directions from an interior seed and merge; used
    for the orbit families that no saddle branch reaches."""
    kw = dict(stop=StopSpec(targets=tuple(stop_targets),
                            arrival=arrival or ArrivalSpec()),
              rtol=rtol, atol=atol, t_cap=t_cap)
    seed = np.asarray(point, float)
    back = integrate(p, seed, direction="backward",
                     origin=f"seed{tuple(point)}", **kw)
    fwd = integrate(p, seed, direction="forward",
                    origin=f"seed{tuple(point)}", **kw)
    merged = merge_orbits(back, fwd, origin=f"seed{tuple(point)}")
    if seed[1] == 0.0:
        # The seed itself is the orbit's axis crossing; the two half
        # integrations only ever depart from it.
        merged.events.append(Event("hit_u_axis", 0.0, {"u": float(seed[0])}))
        merged.events.sort(key=lambda e: e.time)
    return merged


def constant_orbit(p: ModelParams, point, t_span=(0.0, 10.0), n=101) -> Orbit:
    """Constant orbit sitting at an equilibrium (for reparameterization of
    trivial states)."""
    from .model import field_tau

    u, v = (point.u, point.v) if isinstance(point, PhasePoint) else point
    ts = np.linspace(t_span[0], t_span[1], n)
    y = np.tile([u, v], (n, 1))
    f = np.tile(field_tau(p, (u, v)), (n, 1))
    seg = Segment("interior", ts, y, f, ts.copy())
    return Orbit("tau", p, [seg], [], f"constant({u},{v})", "forward")


def detect_period(p: ModelParams, u0: float, *, rtol=1e-10, atol=1e-12,
                  closure_tol=1e-8) -> tuple[float, Orbit]:
    """Period of the closed orbit through (u0, 0) around the center.

    (u0, 0) must lie strictly inside the periodic annulus: H(u0,0) between 0
    and the bounding saddle level max(H(E1), H(E2)).
    """
    if u0 == 0.0:
        raise NonPeriodicError("u0 = 0 is the center itself")
    h = potential_U(p, u0)
    h_bound = max(potential_U(p, 1.0), potential_U(p, p.u_singular))
    if not (h_bound < h < 0.0):
        raise NonPeriodicError(
            f"(u0,0)=({u0},0) is outside the periodic annulus: H={h:.6g} "
            f"not in ({h_bound:.6g}, 0)")
    cfg = [0.0] * K.NCFG
    cfg[K.CFG_STOP_U_AXIS] = 1.0
    cfg[K.CFG_U_AXIS_SIGN] = math.copysign(1.0, u0)
    cfg[K.CFG_U_AXIS_MIN_DT] = 1e-3
    cfg[K.CFG_STOP_SING] = 1.0
    cfg[K.CFG_RHO_ENTER] = 20.0
    cfg[K.CFG_RECORD_CROSS] = 1.0
    st, _, ts, ys, fs, crossings = K.integrate_raw(
        K.FIELD_TAU, p.D, p.alpha, p.mu, float(u0), 0.0, 0.0, 1.0,
        rtol, atol, 10 ** 6, 1e4, cfg, np.empty((0, 6)))
    if st != K.ST_U_AXIS:
        raise NonPeriodicError(f"no section return (integrator status {st})")
    period = float(ts[-1])
    defect = float(np.hypot(ys[-1, 0] - u0, ys[-1, 1]))
    if defect > closure_tol:
        raise NonPeriodicError(f"closure defect {defect:.3e} exceeds {closure_tol:.0e}")
    seg = Segment("interior", ts, ys, fs, ts.copy())
    events = [Event("hit_u_axis", float(t), {"u": float(u)}) for t, u in crossings]
    events.append(Event("closed_loop", period, {"defect": defect}))
    orbit = Orbit("tau", p, [seg], events, f"periodic(u0={u0})", "forward")
    return period, orbit


# ---------------------------------------------------------------------------
# Reparameterization tau -> x
# ---------------------------------------------------------------------------

def _x_integrand(p: ModelParams, seg: Segment):
    """(g, g') with x = ∫ g d(local time) along the segment."""
    D, alpha = p.D, p.alpha
    y, f = seg.y, seg.f
    if seg.frame == "interior":
        g = D + 2.0 * alpha * y[:, 0]
        gp = 2.0 * alpha * y[:, 1]
        return g, gp
    chart = ChartId.of(seg.frame)
    if chart is ChartId.U1:
        return D * y[:, 0] + 2.0 * alpha, D * f[:, 0]
    if chart is ChartId.V1:
        return D * y[:, 0] - 2.0 * alpha, D * f[:, 0]
    if chart is ChartId.U2:
        return D * y[:, 0] + 2.0 * alpha * y[:, 1], D * f[:, 0] + 2.0 * alpha * f[:, 1]
    return D * y[:, 0] - 2.0 * alpha * y[:, 1], D * f[:, 0] - 2.0 * alpha * f[:, 1]


def _qs_tail(p: ModelParams, seg: Segment, array_end: bool, rate: float) -> float:
    """Remaining |x| beyond the sampled range for an orbit converging to the
    saddle on the singular line: fit the amplitude of w = D+2*alpha*u against
    the closed-form rate and integrate the exponential tail.

    array_end says where in the segment arrays the approach samples sit; rate
    is Lambda_minus for the late-time endpoint, Lambda_plus for the early one.
    """
    w = p.D + 2.0 * p.alpha * seg.y[:, 0]
    tau = seg.tau
    if not array_end:
        w = w[::-1]
        tau = tau[::-1]
    wa = np.abs(w)
    w_end = wa[-1]
    mask = wa <= 10.0 * w_end
    if mask.sum() < 5:
        mask = np.zeros(len(wa), bool)
        mask[-min(len(wa), 20):] = True
    # ln w = ln C + rate*tau  =>  amplitude from the window mean.
    lnC = float(np.mean(np.log(wa[mask]) - rate * tau[mask]))
    return math.exp(lnC + rate * tau[-1]) / abs(rate)


def reparameterize_to_x(orbit: Orbit, x0: float = 0.0) -> Orbit:
    """Physical-space parameterization x(tau) = x0 + ∫ (D + 2*alpha*u) dtau.

    Only valid on {u >= -D/(2*alpha)}; orbits that cross the singular line
    are refused. Endpoints at the singular-line saddle get finite
    extrapolated x limits; endpoints at E1 or at infinity diverge.
    """
    p = orbit.params
    tol = 1e-9 * (1.0 + abs(p.u_singular))
    for seg in orbit.segments:
        umin = float(np.min(seg.interior_states(p)[:, 0]))
        if umin < p.u_singular - tol:
            raise SingularLineError(
                f"orbit reaches u={umin} < u_singular={p.u_singular}; "
                "the x parameterization is restricted to u >= -D/(2*alpha)")

    segs = []
    x_base = x0
    for seg in orbit.segments:
        g, gp = _x_integrand(p, seg)
        x = x_base + _cumulative_quad(seg.t, g, gp)
        segs.append(replace(seg, x=x))
        x_base = float(x[-1])

    new = Orbit("x", p, segs, list(orbit.events), orbit.origin, orbit.direction,
                left_id=orbit.left_id, right_id=orbit.right_id)

    # Re-stamp event times in x by interpolation over (tau, x).
    taus = np.concatenate([s.tau for s in segs])
    xs = np.concatenate([s.x for s in segs])
    order = np.argsort(taus)
    new.events = [replace(e, time=float(np.interp(e.time, taus[order], xs[order])))
                  for e in orbit.events]

    first, last = segs[0], segs[-1]
    time_fwd = first.tau[0] <= last.tau[-1]
    lo_seg, hi_seg = (first, last) if time_fwd else (last, first)
    lo_id = new.canonical_left()
    hi_id = new.canonical_right()

    def lo_x():
        return float(lo_seg.x[0] if time_fwd else lo_seg.x[-1])

    def hi_x():
        return float(hi_seg.x[-1] if time_fwd else hi_seg.x[0])

    if lo_id == "E2":
        new.x_minus = lo_x() - _qs_tail(p, lo_seg, array_end=not time_fwd,
                                        rate=p.Lambda_plus)
    elif lo_id in ("E1", "E3", "E4", "E5", "E6"):
        new.x_minus = -math.inf
    else:
        new.x_minus = lo_x()
    if hi_id == "E2":
        new.x_plus = hi_x() + _qs_tail(p, hi_seg, array_end=time_fwd,
                                       rate=p.Lambda_minus)
    elif hi_id in ("E1", "E3", "E4", "E5", "E6"):
        new.x_plus = math.inf
    else:
        new.x_plus = hi_x()
    return new


def tau_blowup_time(orbit: Orbit, side: str = "+") -> float:
    """Finite tau at which an infinity-bound orbit blows up, extrapolated
    from the end chart segment (lambda1 decays at the slow node rate)."""
    p = orbit.params
    time_fwd = orbit.segments[0].tau[0] <= orbit.segments[-1].tau[-1]
    late = side == "+"
    seg = orbit.segments[-1] if late == time_fwd else orbit.segments[0]
    if seg.frame == "interior":
        raise ValueError(f"orbit's {side} end is not in a chart")
    chart = ChartId.of(seg.frame)
    rate = p.sqrt_alpha_mu if chart in (ChartId.U1, ChartId.V1) \
        else p.alpha * p.mu * p.vertical_chart_level ** 3
    idx = -1 if late == time_fwd else 0
    lam1 = float(seg.y[idx, 0])
    sign = 1.0 if late else -1.0
    return float(seg.tau[idx]) + sign * lam1 / rate


# ---------------------------------------------------------------------------
# Asymptotic-rate fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticFit:
    form: str            # exp_growth | exp_decay | linear_hit | power_blowup
    side: str            # "-" (early end) or "+" (late end)
    rate: float
    amplitude: float
    residual: float
    level: float | None = None
    n: int = 0

    def to_json(self) -> dict:
        return {"form": self.form, "side": self.side, "rate": self.rate,
                "amplitude": self.amplitude, "residual": self.residual,
                "level": self.level, "n": self.n}


def _flatten_xu(orbit: Orbit):
    p = orbit.params
    xs, us, taus = [], [], []
    for seg in orbit.segments:
        uv = seg.interior_states(p)
        xs.append(seg.x if seg.x is not None else seg.tau)
        us.append(uv[:, 0])
        taus.append(seg.tau)
    x = np.concatenate(xs)
    u = np.concatenate(us)
    tau = np.concatenate(taus)
    order = np.argsort(tau)
    return x[order], u[order], tau[order]


def _ls_line(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """Least-squares b ~ c0 + c1*a; returns (c0, c1, rms residual)."""
    if len(a) < 2 or np.ptp(a) == 0.0:
        raise FitDegenerateError("design matrix is rank-deficient")
    A = np.column_stack([np.ones_like(a), a])
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = b - A @ sol
    return float(sol[0]), float(sol[1]), float(np.sqrt(np.mean(res ** 2)))


def fit_asymptotics(orbit: Orbit, form: str, side: str = "+",
                    level: float | None = None, min_samples: int = 30,
                    growth_floor: float = 10.0, decay_band: float = 0.1
                    ) -> AsymptoticFit:
    """Least-squares asymptotic fit at one end of an orbit.

    exp_growth   : log u vs x on {u > growth_floor} (x mode)
    exp_decay    : log|u - level| vs x on {|u-level| < decay_band} (x mode)
    linear_hit   : u vs x on {|u - level| < decay_band}; level is read off at
                   the extrapolated finite endpoint (x mode)
    power_blowup : log u vs log(tau_plus - tau) on {u > growth_floor} (tau mode)
    """
    p = orbit.params
    x, u, tau = _flatten_xu(orbit)
    half = len(x) // 2
    pick_late = side == "+"

    if form == "exp_growth":
        if orbit.mode != "x":
            raise ValueError("exp_growth needs an x-mode orbit")
        mask = u > growth_floor
        mask &= (np.arange(len(x)) >= half) if pick_late else (np.arange(len(x)) < half)
        if mask.sum() < min_samples:
            raise InsufficientWindowError(
                f"{int(mask.sum())} samples with u > {growth_floor} on side {side}")
        c0, c1, res = _ls_line(x[mask], np.log(u[mask]))
        return AsymptoticFit(form, side, c1, math.exp(c0), res, None, int(mask.sum()))

    if form == "exp_decay":
        if orbit.mode != "x":
            raise ValueError("exp_decay needs an x-mode orbit")
        if level is None:
            raise ValueError("exp_decay needs the approach level")
        d = np.abs(u - level)
        mask = (d < decay_band) & (d > 1e-11 * (1.0 + abs(level)))
        mask &= (np.arange(len(x)) >= half) if pick_late else (np.arange(len(x)) < half)
        if mask.sum() < min_samples:
            raise InsufficientWindowError(
                f"{int(mask.sum())} samples within {decay_band} of level {level}")
        c0, c1, res = _ls_line(x[mask], np.log(d[mask]))
        return AsymptoticFit(form, side, c1, math.exp(c0), res, level, int(mask.sum()))

    if form == "linear_hit":
        if orbit.mode != "x":
            raise ValueError("linear_hit needs an x-mode orbit")
        lvl = level if level is not None else p.u_singular
        d = np.abs(u - lvl)
        mask = d < decay_band
        mask &= (np.arange(len(x)) >= half) if pick_late else (np.arange(len(x)) < half)
        if mask.sum() < min_samples:
            raise InsufficientWindowError(
                f"{int(mask.sum())} samples within {decay_band} of level {lvl}")
        c0, c1, res = _ls_line(x[mask], u[mask])
        x_end = orbit.x_plus if pick_late else orbit.x_minus
        level_est = c0 + c1 * x_end if (x_end is not None
                                        and math.isfinite(x_end)) else None
        return AsymptoticFit(form, side, c1, abs(c1), res, level_est, int(mask.sum()))

    if form == "power_blowup":
        if orbit.mode != "tau":
            raise ValueError("power_blowup needs a tau-mode orbit")
        tau_star = tau_blowup_time(orbit, side)
        gap = tau_star - tau if pick_late else tau - tau_star
        mask = (u > growth_floor) & (gap > 0.0)
        if mask.sum() < min_samples:
            raise InsufficientWindowError(
                f"{int(mask.sum())} samples with u > {growth_floor}")
        c0, c1, res = _ls_line(np.log(gap[mask]), np.log(u[mask]))
        return AsymptoticFit(form, side, c1, math.exp(c0), res, None, int(mask.sum()))

    raise ValueError(f"unknown fit form {form!r}")
