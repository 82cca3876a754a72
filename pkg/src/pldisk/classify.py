"""Stationary-state classification: endpoint types, the connection graph
over the eleven equilibria, regime reports against the predicted type sets,
and the location of the homoclinic/heteroclinic changeover.

Regimes are named by the ratio of linear to self-diffusion: sub (D < 2*alpha),
critical (D = 2*alpha), super (D > 2*alpha). In physical space x the states
live on {u >= -D/(2*alpha)}; in rescaled time tau the left region also
contributes (the levels below both saddle levels), with endpoint labels
"-1/k" (the singular-line saddle) and "-inf".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BracketError, PatternViolationError, UnclassifiableOrbitError
from .model import ModelParams, conserved_H, potential_U
from .orbits import (ArrivalSpec, Orbit, detect_period, shoot_saddle,
                     trace_through)

__all__ = [
    "classify_endpoint",
    "Edge",
    "PeriodicFamily",
    "ConnectionGraph",
    "connection_graph",
    "RegimeReport",
    "regime_report",
    "expected_types",
    "regime_of",
    "bifurcation_scan",
    "ScanResult",
    "Profile",
    "profile",
]

_X_LEFT = {"E1": "1", "E2": "qs-", "E3": "inf"}
_X_RIGHT = {"E1": "1", "E2": "qs+", "E4": "inf"}
_TAU_LEFT = {"E1": "1", "E2": "-1/k", "E3": "inf", "E5": "-inf"}
_TAU_RIGHT = {"E1": "1", "E2": "-1/k", "E4": "inf", "E6": "-inf"}

_CRITICAL_SMEAR = 1e-6  # relative width of the D = 2*alpha ambiguity band


def regime_of(p: ModelParams, smear: float = _CRITICAL_SMEAR) -> tuple[str, bool]:
    """(regime, within_tolerance): shooting cannot separate the regimes when
    |D - 2*alpha| is below the smear band, so such parameters are reported as
    critical with the tolerance flag raised."""
    gap = p.D - 2.0 * p.alpha
    if gap == 0.0:
        return "critical", False
    if abs(gap) < smear * 2.0 * p.alpha:
        return "critical", True
    return ("sub" if gap < 0.0 else "super"), False


def classify_endpoint(orbit: Orbit, side: str, mode: str = "x",
                      p: ModelParams | None = None) -> str:
    """Endpoint label of an orbit's early ("left"/"-") or late ("right"/"+")
    end, in physical-space ("x") or rescaled-time ("tau") reading."""
    left = side in ("left", "-")
    eq = orbit.canonical_left() if left else orbit.canonical_right()
    if eq is None:
        raise UnclassifiableOrbitError(
            f"orbit {orbit.origin!r} has no equilibrium limit on side {side} "
            f"(terminal event: {orbit.terminal_event})")
    table = (_X_LEFT if left else _X_RIGHT) if mode == "x" \
        else (_TAU_LEFT if left else _TAU_RIGHT)
    if eq not in table:
        raise UnclassifiableOrbitError(
            f"endpoint {eq} on side {side} has no {mode}-mode type")
    return table[eq]


@dataclass
class Edge:
    source: str
    target: str
    orbit: Orbit

    def key(self) -> tuple[str, str]:
        return (self.source, self.target)


@dataclass
class PeriodicFamily:
    probe_u0: float
    period: float
    orbit: Orbit


@dataclass
class ConnectionGraph:
    params: ModelParams
    edges: list[Edge]
    periodic: PeriodicFamily | None
    failures: list[str] = field(default_factory=list)

    @property
    def nodes(self) -> list[str]:
        seen = []
        for e in self.edges:
            for n in (e.source, e.target):
                if n not in seen:
                    seen.append(n)
        return seen

    def edge_set(self) -> set[tuple[str, str]]:
        return {e.key() for e in self.edges}

    def has_edge(self, source: str, target: str) -> bool:
        return (source, target) in self.edge_set()

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": [{"source": e.source, "target": e.target,
                       "origin": e.orbit.origin} for e in self.edges],
            "periodic": (None if self.periodic is None else
                         {"u0": self.periodic.probe_u0,
                          "period": self.periodic.period}),
            "failures": self.failures,
        }


def periodic_annulus_edge(p: ModelParams) -> float:
    """Right edge (on the positive u axis) of the band of closed orbits
    around the origin: where the axis potential meets the binding saddle
    level, or u = 1 when the u=1 saddle binds."""
    h_bound = max(potential_U(p, 1.0), potential_U(p, p.u_singular))
    lo, hi = 1e-9, 1.0
    flo = potential_U(p, lo) - h_bound
    fhi = potential_U(p, hi) - h_bound
    if flo * fhi >= 0.0:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = potential_U(p, mid) - h_bound
        if fm * flo > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


_SADDLE_BRANCHES = ("unstable_plus", "unstable_minus", "stable_plus", "stable_minus")


def connection_graph(p: ModelParams, *, epsilon: float | None = None,
                     rtol: float = 1e-10, atol: float = 1e-12,
                     arrival: ArrivalSpec | None = None,
                     node_shots: bool = True, t_cap: float = 400.0
                     ) -> ConnectionGraph:
    """Directed connecting-orbit graph over the equilibria.

    Every manifold branch of the two saddles is shot; the unstable/stable
    nodes at infinity are probed along their interior-pointing directions;
    the three orbit families (outer right, outer left, periodic) that no
    separatrix reaches are certified from explicit seeds.
    """
    edges: dict[tuple[str, str], Edge] = {}
    failures: list[str] = []

    def add(orbit: Orbit):
        src, dst = orbit.canonical_left(), orbit.canonical_right()
        if src is None or dst is None:
            failures.append(f"{orbit.origin}: no terminal equilibrium "
                            f"({orbit.terminal_event})")
            return
        edges.setdefault((src, dst), Edge(src, dst, orbit))

    kw = dict(epsilon=epsilon, rtol=rtol, atol=atol, arrival=arrival, t_cap=t_cap)
    for eid in ("E1", "E2"):
        for branch in _SADDLE_BRANCHES:
            try:
                add(shoot_saddle(p, eid, branch, **kw))
            except Exception as exc:  # pragma: no cover - aggregated, not raised
                failures.append(f"{eid}:{branch}: {exc}")
    if node_shots:
        for eid, branch in (("E3", "unstable_plus"), ("E5", "unstable_plus"),
                            ("E4", "stable_plus"), ("E6", "stable_plus")):
            try:
                add(shoot_saddle(p, eid, branch, **kw))
            except Exception as exc:  # pragma: no cover
                failures.append(f"{eid}:{branch}: {exc}")

    seed_kw = dict(rtol=rtol, atol=atol, arrival=arrival, t_cap=t_cap)
    u_right = max(1.0, abs(p.u_singular)) + 1.0
    u_left = p.u_singular - max(1.0, abs(p.u_singular))
    for seed in ((u_right, 0.0), (u_left, 0.0)):
        try:
            add(trace_through(p, seed, **seed_kw))
        except Exception as exc:  # pragma: no cover
            failures.append(f"seed{seed}: {exc}")

    periodic = None
    try:
        u0 = 0.5 * periodic_annulus_edge(p)
        period, orb = detect_period(p, u0, rtol=rtol, atol=atol)
        periodic = PeriodicFamily(u0, period, orb)
    except Exception as exc:  # pragma: no cover
        failures.append(f"periodic probe: {exc}")

    return ConnectionGraph(p, list(edges.values()), periodic, failures)


_X_BASE = frozenset({"1_inf", "inf_inf", "inf_1", "periodic"})
_TAU_BASE = frozenset({"1_inf", "inf_1", "inf_inf",
                       "-inf_-1/k", "-1/k_-inf", "-inf_-inf"})


def expected_types(regime: str, mode: str = "x") -> frozenset[str]:
    """Predicted stationary-type sets per regime and parameterization."""
    if mode == "x":
        extra = {"sub": {"qs-_qs+"},
                 "critical": {"1_qs+", "qs-_1"},
                 "super": {"1_1", "inf_qs+", "qs-_inf"}}[regime]
        return _X_BASE | extra
    extra = {"sub": {"-1/k_-1/k", "-inf_1", "1_-inf"},
             "critical": {"-1/k_1", "1_-1/k"},
             "super": {"1_1", "-1/k_inf", "inf_-1/k"}}[regime]
    return _TAU_BASE | extra


_BOUNDED_LABELS = {"1", "qs-", "qs+", "-1/k"}


def _is_bounded_type(name: str) -> bool:
    if name == "periodic":
        return True
    left, _, right = name.partition("_")
    return left in _BOUNDED_LABELS and right in _BOUNDED_LABELS


def _x_valid(orbit: Orbit) -> bool:
    p = orbit.params
    tol = 1e-9 * (1.0 + abs(p.u_singular))
    for seg in orbit.segments:
        if float(np.min(seg.interior_states(p)[:, 0])) < p.u_singular - tol:
            return False
    return True


@dataclass
class RegimeReport:
    params: ModelParams
    mode: str                   # "x" | "tau"
    regime: str                 # sub | critical | super
    critical_within_tolerance: bool
    expected: frozenset[str]
    found: frozenset[str]
    edge_types: dict[tuple[str, str], str]
    graph: ConnectionGraph
    match: bool

    def to_json(self) -> dict:
        unexpected = sorted(t for t in self.found - self.expected
                            if _is_bounded_type(t))
        extra = sorted(t for t in self.found - self.expected
                       if not _is_bounded_type(t))
        return {
            "params": self.params.to_json(),
            "mode": self.mode,
            "regime": self.regime,
            "critical_within_tolerance": self.critical_within_tolerance,
            "expected": sorted(self.expected),
            "found": sorted(self.found),
            "missing": sorted(self.expected - self.found),
            "unexpected_bounded": unexpected,
            "extra_unbounded": extra,
            "edges": [{"source": s, "target": t, "type": ty}
                      for (s, t), ty in sorted(self.edge_types.items())],
            "match": self.match,
            "graph": self.graph.to_json(),
        }


def regime_report(p: ModelParams, mode: str = "x",
                  graph: ConnectionGraph | None = None, **graph_kw) -> RegimeReport:
    """Compute the connection graph, classify every edge into a stationary
    type, and compare with the regime's predicted set.

    match is true iff every predicted type was found and no unpredicted
    *bounded* type appears (unbounded cross-corner types exist at levels the
    predictions do not enumerate and are reported separately).
    """
    if mode not in ("x", "tau"):
        raise ValueError(f"mode must be 'x' or 'tau', got {mode!r}")
    regime, within = regime_of(p)
    if graph is None:
        graph = connection_graph(p, **graph_kw)

    edge_types: dict[tuple[str, str], str] = {}
    found = set()
    for e in graph.edges:
        if mode == "x" and not _x_valid(e.orbit):
            continue
        try:
            lt = classify_endpoint(e.orbit, "left", mode, p)
            rt = classify_endpoint(e.orbit, "right", mode, p)
        except UnclassifiableOrbitError:
            continue
        name = f"{lt}_{rt}"
        edge_types[e.key()] = name
        found.add(name)
    if graph.periodic is not None:
        found.add("periodic")

    expected = expected_types(regime, mode)
    if mode == "tau":
        # The tau-mode predictions do not enumerate the periodic family.
        expected = expected - {"periodic"}
        comparable = {t for t in found if t != "periodic"}
    else:
        comparable = found
    unexpected_bounded = {t for t in comparable - expected if _is_bounded_type(t)}
    match = expected <= found and not unexpected_bounded
    return RegimeReport(p, mode, regime, within, frozenset(expected),
                        frozenset(found), edge_types, graph, match)


@dataclass
class ScanResult:
    alpha: float
    mu: float
    D_star: float
    g_at_bracket: tuple[float, float]
    iterations: int
    flips: dict | None = None

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "mu": self.mu, "D_star": self.D_star,
                "g_at_bracket": list(self.g_at_bracket),
                "iterations": self.iterations, "flips": self.flips}


def saddle_level_gap(D: float, alpha: float, mu: float) -> float:
    """g(D) = H(E1) - H(E2); its unique positive root is the changeover."""
    p = ModelParams(D, alpha, mu)
    return conserved_H(p, (1.0, 0.0)) - conserved_H(p, (p.u_singular, 0.0))


def bifurcation_scan(alpha: float, mu: float, D_range, *, rel_tol: float = 1e-10,
                     validate: bool = False, flip_margin: float = 0.25) -> ScanResult:
    """Locate the homoclinic/heteroclinic changeover D* as the root of the
    saddle-level gap by bisection; optionally confirm the qualitative graph
    flip on either side of D*."""
    lo, hi = float(D_range[0]), float(D_range[1])
    if not (0.0 < lo < hi):
        raise BracketError(f"invalid interval ({lo}, {hi})")
    g_lo = saddle_level_gap(lo, alpha, mu)
    g_hi = saddle_level_gap(hi, alpha, mu)
    if g_lo == 0.0:
        return ScanResult(alpha, mu, lo, (g_lo, g_hi), 0)
    if g_hi == 0.0:
        return ScanResult(alpha, mu, hi, (g_lo, g_hi), 0)
    if g_lo * g_hi > 0.0:
        raise BracketError(
            f"saddle-level gap has equal signs at the interval ends: "
            f"g({lo})={g_lo:.3e}, g({hi})={g_hi:.3e}")
    it = 0
    a, b = lo, hi
    while (b - a) > rel_tol * 0.5 * (a + b) and it < 200:
        mid = 0.5 * (a + b)
        gm = saddle_level_gap(mid, alpha, mu)
        if gm == 0.0:
            a = b = mid
            break
        if gm * g_lo > 0.0:
            a = mid
        else:
            b = mid
        it += 1
    d_star = 0.5 * (a + b)
    flips = None
    if validate:
        flips = {}
        for tag, D in (("sub_side", d_star * (1.0 - flip_margin)),
                       ("super_side", d_star * (1.0 + flip_margin)),
                       ("at_star", d_star)):
            g = connection_graph(ModelParams(D, alpha, mu))
            flips[tag] = {
                "D": D,
                "homoclinic_E2": g.has_edge("E2", "E2"),
                "homoclinic_E1": g.has_edge("E1", "E1"),
                "heteroclinic_loop": g.has_edge("E1", "E2") and g.has_edge("E2", "E1"),
            }
    return ScanResult(alpha, mu, d_star, (g_lo, g_hi), it, flips)


@dataclass
class Profile:
    x: np.ndarray
    u: np.ndarray
    ux: np.ndarray
    turning_points: list[dict]      # {"x":, "u":, "kind": "max"|"min"}
    type_name: str | None = None

    def to_json(self) -> dict:
        return {"n": len(self.x), "type": self.type_name,
                "turning_points": self.turning_points}


# Expected interior turning-point patterns per type: list of extremum kinds
# in x order. Monotone types have none.
_TURNING_PATTERNS = {
    "qs-_qs+": ["max"], "1_1": ["min"], "inf_inf": ["min"],
    "1_inf": [], "inf_1": [], "1_qs+": [], "qs-_1": [],
    "inf_qs+": [], "qs-_inf": [],
}

# Conventional name of the single turning point each non-monotone type has.
_TURNING_LABELS = {"qs-_qs+": "x*", "1_1": "x_*", "inf_inf": "x0"}


def profile(orbit_x: Orbit, expected_type: str | None = None) -> Profile:
    """Physical-space profile (x, u, u_x) with its interior turning points.

    u_x is recovered as v/(D+2*alpha*u). When expected_type is given, the
    sign structure of u_x is checked against the type's monotonicity pattern.
    """
    if orbit_x.mode != "x":
        raise ValueError("profile needs an x-mode orbit (reparameterize first)")
    p = orbit_x.params
    xs, us, uxs = [], [], []
    for seg in orbit_x.segments:
        uv = seg.interior_states(p)
        w = p.D + 2.0 * p.alpha * uv[:, 0]
        xs.append(seg.x)
        us.append(uv[:, 0])
        with np.errstate(divide="ignore", invalid="ignore"):
            uxs.append(np.where(np.abs(w) > 0.0, uv[:, 1] / w, np.nan))
    x = np.concatenate(xs)
    u = np.concatenate(us)
    ux = np.concatenate(uxs)
    order = np.argsort(x)
    x, u, ux = x[order], u[order], ux[order]

    turns = []
    for e in orbit_x.events:
        if e.kind != "hit_u_axis":
            continue
        u_t = e.data["u"]
        # v goes from the approach sign to its negative: kind from curvature,
        # v' = mu*u*(u-1)*(D+2*alpha*u) sign at the crossing.
        vp = p.mu * u_t * (u_t - 1.0) * (p.D + 2.0 * p.alpha * u_t)
        turns.append({"x": e.time, "u": u_t, "kind": "max" if vp < 0.0 else "min"})
    turns.sort(key=lambda d: d["x"])

    if expected_type is not None:
        pattern = _TURNING_PATTERNS.get(expected_type)
        if pattern is None:
            raise PatternViolationError(f"no turning pattern for {expected_type!r}")
        kinds = [t["kind"] for t in turns]
        if kinds != pattern:
            raise PatternViolationError(
                f"type {expected_type}: expected turning pattern {pattern}, "
                f"found {kinds}")
        if turns and expected_type in _TURNING_LABELS:
            turns[0]["label"] = _TURNING_LABELS[expected_type]
        finite = np.isfinite(ux)
        scale = float(np.nanmax(np.abs(ux[finite]))) if finite.any() else 1.0
        bounds = [x[0]] + [t["x"] for t in turns] + [x[-1]]
        for i in range(len(bounds) - 1):
            mid_mask = (x > bounds[i]) & (x < bounds[i + 1]) & finite \
                & (np.abs(ux) > 1e-7 * scale)
            if not mid_mask.any():
                continue
            signs = np.sign(ux[mid_mask])
            if not (signs == signs[0]).all():
                raise PatternViolationError(
                    f"u_x changes sign inside ({bounds[i]:.4g}, {bounds[i+1]:.4g}) "
                    f"although type {expected_type} is monotone there")
    return Profile(x, u, ux, turns, expected_type)
