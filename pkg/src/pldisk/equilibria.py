"""All eleven equilibria: closed-form Jacobians, eigen-pairs, stability.

Finite: E0 (center), E1 and E2 (saddles). At infinity, per chart: E3/E4 in
U1, E5/E6 in V1, E7/E8 in U2, E9/E10 in V2; the odd-indexed ones repel, the
even-indexed ones attract, for every positive parameter triple.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .charts import ChartId, ChartPoint, infinity_equilibria
from .errors import InvalidBranchError
from .model import ModelParams, PhasePoint, field_tau

__all__ = [
    "Stability",
    "Equilibrium",
    "eigen2",
    "numerical_jacobian",
    "finite_equilibria",
    "all_equilibria",
    "equilibrium_by_id",
    "CANONICAL_CORNER",
    "FINITE_IDS",
    "INFINITY_IDS",
]

FINITE_IDS = ("E0", "E1", "E2")
INFINITY_IDS = ("E3", "E4", "E5", "E6", "E7", "E8", "E9", "E10")

# The four corners of the compactified plane are each covered by two charts;
# classification speaks about one representative per corner.
CANONICAL_CORNER = {"E8": "E4", "E9": "E3", "E7": "E5", "E10": "E6",
                    "E3": "E3", "E4": "E4", "E5": "E5", "E6": "E6"}


class Stability(enum.Enum):
    SADDLE = "saddle"
    CENTER = "center"
    STABLE_NODE = "stable_node"
    UNSTABLE_NODE = "unstable_node"


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: tuple[complex, complex]
    repeated: bool = False


@dataclass(frozen=True)
class Equilibrium:
    id: str
    frame: str                     # "interior" or a chart name
    location: tuple[float, float]  # (u, v) or (lambda1, lambda2)
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    eigen: tuple[EigenPair, EigenPair]
    stability: Stability

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        return (self.eigen[0].value, self.eigen[1].value)

    @property
    def point(self):
        if self.frame == "interior":
            return PhasePoint(*self.location)
        return ChartPoint(ChartId.of(self.frame), *self.location)

    def branch_direction(self, branch: str) -> tuple[np.ndarray, str]:
        """Unit launch direction and time direction for a manifold branch.

        Saddles accept Unstable/Stable x Plus/Minus. Nodes accept the same
        tags but always launch along the interior-pointing slow direction;
        the sign must keep lambda1 > 0.
        """
        want_unstable = branch.startswith("unstable")
        sign = +1.0 if branch.endswith("plus") else -1.0
        if self.stability is Stability.SADDLE:
            lam0, lam1 = self.eigen[0].value.real, self.eigen[1].value.real
            idx = (0 if lam0 > 0 else 1) if want_unstable else (0 if lam0 < 0 else 1)
            lam = (lam0, lam1)[idx]
            if (lam > 0) != want_unstable:
                raise InvalidBranchError(f"{self.id} has no {branch} branch")
            vec = np.array([c.real for c in self.eigen[idx].vector])
            vec = sign * vec / np.linalg.norm(vec)
            return vec, ("forward" if want_unstable else "backward")
        if self.stability in (Stability.UNSTABLE_NODE, Stability.STABLE_NODE):
            repelling = self.stability is Stability.UNSTABLE_NODE
            if want_unstable != repelling:
                raise InvalidBranchError(
                    f"{self.id} is a {self.stability.value}; no {branch} branch")
            # Slow eigendirection: the fast one is tangent to {lambda1 = 0}.
            mags = [abs(ep.value) for ep in self.eigen]
            idx = int(np.argmin(mags))
            vec = np.array([c.real for c in self.eigen[idx].vector])
            vec = sign * vec / np.linalg.norm(vec)
            if vec[0] < 0.0:
                raise InvalidBranchError(
                    f"{branch} on {self.id} points out of the chart (lambda1 < 0)")
            return vec, ("forward" if repelling else "backward")
        raise InvalidBranchError(f"cannot launch a manifold branch from {self.id}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "frame": self.frame,
            "chart": None if self.frame == "interior" else self.frame,
            "location": list(self.location),
            "jacobian": [list(r) for r in self.jacobian],
            "eigenvalues": [{"re": ev.real, "im": ev.imag} for ev in self.eigenvalues],
            "eigenvectors": [[{"re": c.real, "im": c.imag} for c in ep.vector]
                             for ep in self.eigen],
            "stability": self.stability.value,
        }


def eigen2(m) -> tuple[EigenPair, EigenPair]:
    """Closed-form eigen-decomposition of a real 2x2 matrix via trace and
    determinant; eigenvectors are scaled to unit first component when that
    component is not negligible, else to unit norm."""
    (a, b), (c, d) = ((float(m[0][0]), float(m[0][1])),
                      (float(m[1][0]), float(m[1][1])))
    tr = a + d
    det = a * d - b * c
    disc = 0.25 * tr * tr - det
    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    if disc >= 0.0:
        root = math.sqrt(disc)
        lams = (complex(0.5 * tr + root), complex(0.5 * tr - root))
    else:
        root = math.sqrt(-disc)
        lams = (complex(0.5 * tr, root), complex(0.5 * tr, -root))

    def vec_for(lam: complex) -> tuple[complex, complex]:
        # Rows of (M - lam I) are parallel; a null vector comes from either.
        if abs(b) > 1e-14 * scale:
            w = (complex(1.0), (lam - a) / b)
        elif abs(c) > 1e-14 * scale:
            w = ((lam - d) / c, complex(1.0))
        else:
            # Diagonal matrix: coordinate axes.
            w = (complex(1.0), complex(0.0)) if abs(lam - a) <= abs(lam - d) \
                else (complex(0.0), complex(1.0))
        if abs(w[0]) > 1e-12:
            w = (complex(1.0), w[1] / w[0])
        else:
            n = math.sqrt(abs(w[0]) ** 2 + abs(w[1]) ** 2)
            w = (w[0] / n, w[1] / n)
        return w

    rep = disc == 0.0
    return (EigenPair(lams[0], vec_for(lams[0]), rep),
            EigenPair(lams[1], vec_for(lams[1]), rep))


def numerical_jacobian(field, pt, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of a planar field at pt."""
    x = np.asarray(pt, dtype=float)
    if h is None:
        h = 1e-6 * (1.0 + float(np.linalg.norm(x)))
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fp = np.asarray(field(x + e), dtype=float)
        fm = np.asarray(field(x - e), dtype=float)
        J[:, j] = (fp - fm) / (2.0 * h)
    return J


def _classify(lams: tuple[complex, complex]) -> Stability:
    l0, l1 = lams
    re0, re1 = l0.real, l1.real
    if abs(l0.imag) > 0.0 or abs(l1.imag) > 0.0:
        if re0 == 0.0 and re1 == 0.0:
            return Stability.CENTER
        raise RuntimeError(f"unexpected focus spectrum {lams}; the interior "
                           "system is conservative and charts are nodes")
    if re0 > 0.0 and re1 > 0.0:
        return Stability.UNSTABLE_NODE
    if re0 < 0.0 and re1 < 0.0:
        return Stability.STABLE_NODE
    if re0 * re1 < 0.0:
        return Stability.SADDLE
    raise RuntimeError(f"degenerate spectrum {lams}")


def _companion(c: float):
    return ((0.0, 1.0), (c, 0.0))


def finite_equilibria(p: ModelParams) -> list[Equilibrium]:
    """E0=(0,0), E1=(1,0), E2=(-D/(2 alpha),0) with companion Jacobians."""
    out = []
    j0 = _companion(-p.mu * p.D)
    out.append(Equilibrium("E0", "interior", (0.0, 0.0), j0, eigen2(j0),
                           _classify(tuple(e.value for e in eigen2(j0)))))
    j1 = _companion(2.0 * p.alpha * p.mu + p.mu * p.D)
    out.append(Equilibrium("E1", "interior", (1.0, 0.0), j1, eigen2(j1),
                           _classify(tuple(e.value for e in eigen2(j1)))))
    j2 = _companion(p.mu * p.D * (2.0 * p.alpha + p.D) / (2.0 * p.alpha))
    out.append(Equilibrium("E2", "interior", (p.u_singular, 0.0), j2, eigen2(j2),
                           _classify(tuple(e.value for e in eigen2(j2)))))
    return out


def _chart_jacobians(p: ModelParams):
    s = p.sqrt_alpha_mu
    m3 = p.vertical_chart_level ** 3
    a = p.alpha
    mu = p.mu
    D = p.D
    q = mu * (2.0 * a - D)
    amu = a * mu
    return {
        "E3": ((s, 0.0), (-q, 4.0 * s)),
        "E4": ((-s, 0.0), (-q, -4.0 * s)),
        "E5": ((s, 0.0), (q, 4.0 * s)),
        "E6": ((-s, 0.0), (q, -4.0 * s)),
        "E7": ((amu * m3, 0.0), (-0.5 * q * m3, 4.0 * amu * m3)),
        "E8": ((-amu * m3, 0.0), (0.5 * q * m3, -4.0 * amu * m3)),
        "E9": ((amu * m3, 0.0), (0.5 * q * m3, 4.0 * amu * m3)),
        "E10": ((-amu * m3, 0.0), (-0.5 * q * m3, -4.0 * amu * m3)),
    }


_CHART_OF = {"E3": ChartId.U1, "E4": ChartId.U1, "E5": ChartId.V1, "E6": ChartId.V1,
             "E7": ChartId.U2, "E8": ChartId.U2, "E9": ChartId.V2, "E10": ChartId.V2}


def all_equilibria(p: ModelParams) -> list[Equilibrium]:
    """The three finite equilibria followed by the eight at infinity."""
    out = finite_equilibria(p)
    jacs = _chart_jacobians(p)
    for chart in (ChartId.U1, ChartId.V1, ChartId.U2, ChartId.V2):
        lo, hi = infinity_equilibria(chart, p)
        base = {ChartId.U1: 3, ChartId.V1: 5, ChartId.U2: 7, ChartId.V2: 9}[chart]
        for off, cpt in ((0, lo), (1, hi)):
            eid = f"E{base + off}"
            J = jacs[eid]
            eig = eigen2(J)
            out.append(Equilibrium(eid, chart.value,
                                   (cpt.lambda1, cpt.lambda2), J, eig,
                                   _classify((eig[0].value, eig[1].value))))
    return out


def equilibrium_by_id(p: ModelParams, eid: str) -> Equilibrium:
    for eq in all_equilibria(p):
        if eq.id == eid:
            return eq
    raise KeyError(f"unknown equilibrium id {eid!r}")


def jacobian_field(p: ModelParams, eq: Equilibrium):
    """Callable planar field in the equilibrium's own frame. Chart fields are
    polynomial, so differencing across lambda1 = 0 is fine."""
    if eq.frame == "interior":
        return lambda x: field_tau(p, (x[0], x[1]))
    chart = ChartId.of(eq.frame)
    from .charts import chart_field_raw

    return lambda x: chart_field_raw(chart, x[0], x[1], p)
