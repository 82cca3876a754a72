"""Directional charts resolving the dynamics at infinity.

Four charts cover the circle at infinity of the compactified plane, with
scaling weights (1, 2) on (u, v):

  U1: u =  1/l1, v =  l2/l1^2   (u -> +inf)
  V1: u = -1/l1, v = -l2/l1^2   (u -> -inf)
  U2: u =  l2/l1, v =  1/l1^2   (v -> +inf)
  V2: u = -l2/l1, v = -1/l1^2   (v -> -inf)

l1 = 0 is infinity. Each chart field below is the pushforward of the
rescaled interior field, desingularized by ds/dtau = 1/l1, and is polynomial.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ChartDomainError, InfinityPointError
from .model import ModelParams, PhasePoint

__all__ = [
    "ChartId",
    "ChartPoint",
    "to_chart",
    "from_chart",
    "chart_field",
    "infinity_equilibria",
    "chart_for_point",
    "pushforward_consistency_residual",
    "CORNER_SIGNS",
]


class ChartId(enum.Enum):
    U1 = "U1"
    V1 = "V1"
    U2 = "U2"
    V2 = "V2"

    @classmethod
    def of(cls, val) -> "ChartId":
        return val if isinstance(val, cls) else cls(str(val))


# Sign of (u, v) at the corner each chart's equilibria sit on, keyed by the
# sign of lambda2 there: chart -> {-1: corner, +1: corner}.
CORNER_SIGNS = {
    ChartId.U1: {-1: (+1, -1), +1: (+1, +1)},
    ChartId.V1: {-1: (-1, +1), +1: (-1, -1)},
    ChartId.U2: {-1: (-1, +1), +1: (+1, +1)},
    ChartId.V2: {-1: (+1, -1), +1: (-1, -1)},
}


@dataclass(frozen=True)
class ChartPoint:
    chart: ChartId
    lambda1: float
    lambda2: float

    def __post_init__(self):
        object.__setattr__(self, "chart", ChartId.of(self.chart))
        if self.lambda1 < 0.0:
            raise ChartDomainError(f"lambda1 must be >= 0, got {self.lambda1}")

    def to_json(self) -> dict:
        return {"chart": self.chart.value, "l1": self.lambda1, "l2": self.lambda2}

    @classmethod
    def from_json(cls, obj) -> "ChartPoint":
        return cls(ChartId.of(obj["chart"]), float(obj["l1"]), float(obj["l2"]))


def _uv(pt) -> tuple[float, float]:
    if isinstance(pt, PhasePoint):
        return pt.u, pt.v
    u, v = pt
    return float(u), float(v)


def to_chart(chart, pt) -> ChartPoint:
    """Interior point -> chart coordinates; the point must lie in the chart's
    half plane (U1: u>0, V1: u<0, U2: v>0, V2: v<0)."""
    chart = ChartId.of(chart)
    u, v = _uv(pt)
    if chart is ChartId.U1:
        if u <= 0.0:
            raise ChartDomainError(f"U1 covers u > 0, got u={u}")
        l1 = 1.0 / u
        return ChartPoint(chart, l1, v * l1 * l1)
    if chart is ChartId.V1:
        if u >= 0.0:
            raise ChartDomainError(f"V1 covers u < 0, got u={u}")
        l1 = -1.0 / u
        return ChartPoint(chart, l1, -v * l1 * l1)
    if chart is ChartId.U2:
        if v <= 0.0:
            raise ChartDomainError(f"U2 covers v > 0, got v={v}")
        l1 = 1.0 / math.sqrt(v)
        return ChartPoint(chart, l1, u * l1)
    if chart is ChartId.V2:
        if v >= 0.0:
            raise ChartDomainError(f"V2 covers v < 0, got v={v}")
        l1 = 1.0 / math.sqrt(-v)
        return ChartPoint(chart, l1, -u * l1)
    raise ChartDomainError(f"unknown chart {chart!r}")


def from_chart(cpt: ChartPoint) -> PhasePoint:
    """Chart point -> interior coordinates; fails on the sphere at infinity."""
    l1, l2 = cpt.lambda1, cpt.lambda2
    if l1 == 0.0:
        raise InfinityPointError("lambda1 = 0 is the sphere at infinity")
    chart = cpt.chart
    if chart is ChartId.U1:
        return PhasePoint(1.0 / l1, l2 / (l1 * l1))
    if chart is ChartId.V1:
        return PhasePoint(-1.0 / l1, -l2 / (l1 * l1))
    if chart is ChartId.U2:
        return PhasePoint(l2 / l1, 1.0 / (l1 * l1))
    return PhasePoint(-l2 / l1, -1.0 / (l1 * l1))


def chart_field(cpt: ChartPoint, p: ModelParams) -> tuple[float, float]:
    """Desingularized chart vector field (d/ds) at a chart point."""
    return chart_field_raw(cpt.chart, cpt.lambda1, cpt.lambda2, p)


def chart_field_raw(chart: ChartId, l1: float, l2: float,
                    p: ModelParams) -> tuple[float, float]:
    """chart_field on raw coordinates (polynomial, no domain checks)."""
    D, alpha, mu = p.D, p.alpha, p.mu
    chart = ChartId.of(chart)
    if chart is ChartId.U1:
        return (-l1 * l2,
                -mu * D * l1 * l1 - mu * (2 * alpha - D) * l1 + 2 * alpha * mu - 2 * l2 * l2)
    if chart is ChartId.V1:
        return (-l1 * l2,
                -mu * D * l1 * l1 + mu * (2 * alpha - D) * l1 + 2 * alpha * mu - 2 * l2 * l2)
    if chart is ChartId.U2:
        return (0.5 * mu * D * l1 ** 3 * l2
                + 0.5 * mu * (2 * alpha - D) * l1 ** 2 * l2 ** 2
                - alpha * mu * l1 * l2 ** 3,
                1.0 + 0.5 * mu * D * l1 ** 2 * l2 ** 2
                + 0.5 * mu * (2 * alpha - D) * l1 * l2 ** 3
                - alpha * mu * l2 ** 4)
    return (0.5 * mu * D * l1 ** 3 * l2
            - 0.5 * mu * (2 * alpha - D) * l1 ** 2 * l2 ** 2
            - alpha * mu * l1 * l2 ** 3,
            1.0 + 0.5 * mu * D * l1 ** 2 * l2 ** 2
            - 0.5 * mu * (2 * alpha - D) * l1 * l2 ** 3
            - alpha * mu * l2 ** 4)


def infinity_equilibria(chart, p: ModelParams) -> list[ChartPoint]:
    """The two equilibria on {lambda1 = 0} of the given chart.

    Horizontal charts: lambda2 = ±sqrt(alpha*mu). Vertical charts:
    lambda2 = ±(alpha*mu)^(-1/4), the roots of 1 - alpha*mu*lambda2^4.
    """
    chart = ChartId.of(chart)
    if chart in (ChartId.U1, ChartId.V1):
        level = p.sqrt_alpha_mu
    else:
        level = p.vertical_chart_level
    return [ChartPoint(chart, 0.0, -level), ChartPoint(chart, 0.0, level)]


def chart_for_point(u: float, v: float) -> ChartId:
    """Chart whose defining coordinate dominates at (u, v): compare |u| with
    |v|^(1/2) (the weighted magnitudes), then pick the signed half-plane."""
    if u ** 4 >= v * v:
        return ChartId.U1 if u > 0.0 else ChartId.V1
    return ChartId.U2 if v > 0.0 else ChartId.V2


def _transform_jacobian(chart: ChartId, u: float, v: float):
    # d(l1, l2)/d(u, v) of to_chart, in closed form.
    if chart is ChartId.U1:
        return ((-1.0 / u ** 2, 0.0), (-2.0 * v / u ** 3, 1.0 / u ** 2))
    if chart is ChartId.V1:
        return ((1.0 / u ** 2, 0.0), (2.0 * v / u ** 3, -1.0 / u ** 2))
    if chart is ChartId.U2:
        return ((0.0, -0.5 * v ** -1.5), (v ** -0.5, -0.5 * u * v ** -1.5))
    return ((0.0, 0.5 * (-v) ** -1.5), (-(-v) ** -0.5, -0.5 * u * (-v) ** -1.5))


def pushforward_consistency_residual(p: ModelParams, pt, chart=None) -> float:
    """Relative defect of the identity  chart_field = l1 * J(to_chart) f_tau.

    Zero (to rounding) certifies that each printed chart system really is the
    time-rescaled pushforward of the interior field.
    """
    from .model import field_tau

    u, v = _uv(pt)
    chart = ChartId.of(chart) if chart is not None else chart_for_point(u, v)
    cpt = to_chart(chart, (u, v))
    (j11, j12), (j21, j22) = _transform_jacobian(chart, u, v)
    f1, f2 = field_tau(p, (u, v))
    push1 = cpt.lambda1 * (j11 * f1 + j12 * f2)
    push2 = cpt.lambda1 * (j21 * f1 + j22 * f2)
    c1, c2 = chart_field(cpt, p)
    num = math.hypot(push1 - c1, push2 - c2)
    den = 1.0 + math.hypot(c1, c2)
    return num / den
