"""Model parameters, interior vector fields, conserved quantity, symmetries.

The stationary profile equation 0 = [(D+2*alpha*u)u_x]_x + mu*u*(1-u) is
reduced with v = (D+2*alpha*u)*u_x to a planar system, in two equivalent
parameterizations:

  physical space x:   u_x = v/(D+2*alpha*u),   v_x = -mu*u*(1-u)
  rescaled time tau:  u'  = v,                 v'  = -mu*u*(1-u)*(D+2*alpha*u)

The tau system is polynomial, shares its integral curves with the x system on
{u >= -D/(2*alpha)}, and carries the first integral H used throughout.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

from .errors import ParameterDomainError, SingularLineError

__all__ = [
    "ModelParams",
    "PhasePoint",
    "SymmetryKind",
    "QuasiHomogeneityReport",
    "make_params",
    "field_x",
    "field_tau",
    "time_rescale_factor",
    "conserved_H",
    "potential_U",
    "symmetry_apply",
    "quasi_homogeneity_check",
    "appendix_b_params",
]


@dataclass(frozen=True)
class ModelParams:
    """Positive parameter triple (D, alpha, mu) with derived constants."""

    D: float
    alpha: float
    mu: float

    def __post_init__(self):
        for name in ("D", "alpha", "mu"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ParameterDomainError(f"{name} must be a real number, got {val!r}")
            val = float(val)
            if not math.isfinite(val) or val <= 0.0:
                raise ParameterDomainError(f"{name} must be finite and > 0, got {val}")
            object.__setattr__(self, name, val)

    @property
    def omega_plus(self) -> float:
        return math.sqrt(self.mu * (2.0 * self.alpha + self.D))

    @property
    def omega_minus(self) -> float:
        return -self.omega_plus

    @property
    def Lambda_plus(self) -> float:
        return math.sqrt((self.mu * self.D ** 2 + 2.0 * self.alpha * self.mu * self.D)
                         / (2.0 * self.alpha))

    @property
    def Lambda_minus(self) -> float:
        return -self.Lambda_plus

    @property
    def sqrt_alpha_mu(self) -> float:
        return math.sqrt(self.alpha * self.mu)

    @property
    def M(self) -> float:
        return math.sqrt(1.0 / (self.alpha * self.mu))

    @property
    def u_singular(self) -> float:
        return -self.D / (2.0 * self.alpha)

    @property
    def vertical_chart_level(self) -> float:
        """lambda2 value of the equilibria in the vertical charts.

        Root of 1 - alpha*mu*lambda2^4 = 0, i.e. (alpha*mu)^(-1/4) = sqrt(M).
        """
        return math.sqrt(self.M)

    def singular_guard(self) -> float:
        return 1e-12 * (1.0 + self.D)

    def to_json(self) -> dict:
        return {"D": self.D, "alpha": self.alpha, "mu": self.mu}

    @classmethod
    def from_json(cls, obj) -> "ModelParams":
        if isinstance(obj, str):
            obj = json.loads(obj)
        unknown = set(obj) - {"D", "alpha", "mu"}
        if unknown:
            raise ParameterDomainError(f"unknown parameter keys: {sorted(unknown)}")
        try:
            return cls(float(obj["D"]), float(obj["alpha"]), float(obj["mu"]))
        except KeyError as exc:
            raise ParameterDomainError(f"missing parameter key: {exc}") from exc


def make_params(D, alpha, mu) -> ModelParams:
    return ModelParams(D, alpha, mu)


@dataclass(frozen=True)
class PhasePoint:
    """Interior point: density u and flux v = (D+2*alpha*u)*u_x."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"phase point must be finite, got ({self.u}, {self.v})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.u, self.v)


class SymmetryKind(enum.Enum):
    REVERSAL = "reversal"  # (u, v) -> (u, -v), orientation reversed
    MIRROR = "mirror"      # (u, v) -> (-u, v), orientation reversed


def _uv(pt) -> tuple[float, float]:
    if isinstance(pt, PhasePoint):
        return pt.u, pt.v
    u, v = pt
    return float(u), float(v)


def field_x(p: ModelParams, pt) -> tuple[float, float]:
    """Right-hand side of the physical-space system; rejects the singular line."""
    u, v = _uv(pt)
    w = p.D + 2.0 * p.alpha * u
    if abs(w) < p.singular_guard():
        raise SingularLineError(
            f"point u={u} lies on the line u = -D/(2*alpha) = {p.u_singular}")
    return (v / w, -p.mu * u * (1.0 - u))


def field_tau(p: ModelParams, pt) -> tuple[float, float]:
    """Right-hand side of the rescaled (polynomial) system; defined everywhere."""
    u, v = _uv(pt)
    return (v, -p.mu * u * (1.0 - u) * (p.D + 2.0 * p.alpha * u))


def time_rescale_factor(p: ModelParams, u: float) -> float:
    """dx/dtau = D + 2*alpha*u (zero on the singular line, negative left of it)."""
    return p.D + 2.0 * p.alpha * float(u)


def conserved_H(p: ModelParams, pt) -> float:
    """First integral of the rescaled system:

    H(u,v) = (1/2) alpha mu u^4 + ((mu D - 2 alpha mu)/3) u^3 - (mu D/2) u^2 - v^2/2
    """
    u, v = _uv(pt)
    return (0.5 * p.alpha * p.mu * u ** 4
            + (p.mu * p.D - 2.0 * p.alpha * p.mu) / 3.0 * u ** 3
            - 0.5 * p.mu * p.D * u ** 2
            - 0.5 * v ** 2)


def potential_U(p: ModelParams, u: float) -> float:
    """u-part of H; on the axis H(u, 0) = potential_U(u). Level sets obey
    v^2 = 2*(potential_U(u) - H)."""
    u = float(u)
    return (0.5 * p.alpha * p.mu * u ** 4
            + (p.mu * p.D - 2.0 * p.alpha * p.mu) / 3.0 * u ** 3
            - 0.5 * p.mu * p.D * u ** 2)


def conserved_H_scale(p: ModelParams, pt) -> float:
    """Sum of the magnitudes of H's terms; scale for relative drift measures."""
    u, v = _uv(pt)
    return (0.5 * p.alpha * p.mu * u ** 4
            + abs(p.mu * p.D - 2.0 * p.alpha * p.mu) / 3.0 * abs(u) ** 3
            + 0.5 * p.mu * p.D * u ** 2
            + 0.5 * v ** 2)


def symmetry_apply(kind: SymmetryKind, pt) -> PhasePoint:
    """Apply one of the system's two symmetries to a point (time reversal,
    which both symmetries carry, is the integrator caller's responsibility)."""
    u, v = _uv(pt)
    if kind is SymmetryKind.REVERSAL:
        return PhasePoint(u, -v)
    if kind is SymmetryKind.MIRROR:
        return PhasePoint(-u, v)
    raise ValueError(f"unknown symmetry {kind!r}")


@dataclass(frozen=True)
class QuasiHomogeneityReport:
    """Scaling-limit residuals certifying the field's behavior at infinity."""

    type_exponents: tuple[int, int]
    order: int
    residuals: tuple[tuple[float, float, float], ...]  # rows (R, res1, res2)

    @property
    def decays(self) -> bool:
        """Residual magnitudes decrease along the R ladder (10% slack)."""
        ok = True
        for j in (1, 2):
            vals = [abs(r[j]) for r in self.residuals]
            if all(v == 0.0 for v in vals):
                continue
            ok = ok and all(b < a * 1.1 for a, b in zip(vals, vals[1:]))
        return ok

    def log_slope(self) -> float:
        """Least-squares slope of log|res| vs log R over the nonzero component."""
        import numpy as np

        rows = [(r[0], max(abs(r[1]), abs(r[2]))) for r in self.residuals]
        rows = [(R, m) for R, m in rows if m > 0.0]
        if len(rows) < 2:
            return 0.0
        lr = np.log([R for R, _ in rows])
        lm = np.log([m for _, m in rows])
        return float(np.polyfit(lr, lm, 1)[0])


# Scaling exponents and order of the leading part (v, 2*alpha*mu*u^3):
# weights (1, 2) on (u, v), every component gains a factor R^(k+weight), k=1.
_TYPE = (1, 2)
_K = 1


def quasi_homogeneity_check(p: ModelParams, probe, R_ladder=(10.0, 1e2, 1e3, 1e4)
                            ) -> QuasiHomogeneityReport:
    """Evaluate the scaling residuals

    R^-(k+a_j) * { f_j(R^a1 u, R^a2 v) - R^(k+a_j) (f_lead)_j(u, v) }

    over the R ladder; they must vanish as R grows for the compactified
    charts to resolve infinity correctly.
    """
    u, v = _uv(probe)
    if u == 0.0 and v == 0.0:
        raise ValueError("probe must be nonzero")
    Rs = [float(R) for R in R_ladder]
    if any(R <= 1.0 for R in Rs) or any(b <= a for a, b in zip(Rs, Rs[1:])):
        raise ValueError("R ladder must be strictly increasing with all entries > 1")
    a1, a2 = _TYPE
    rows = []
    for R in Rs:
        su, sv = R ** a1 * u, R ** a2 * v
        f1, f2 = field_tau(p, (su, sv))
        lead1 = v
        lead2 = 2.0 * p.alpha * p.mu * u ** 3
        r1 = (f1 - R ** (_K + a1) * lead1) / R ** (_K + a1)
        r2 = (f2 - R ** (_K + a2) * lead2) / R ** (_K + a2)
        rows.append((R, r1, r2))
    return QuasiHomogeneityReport(_TYPE, _K + 1, tuple(rows))


def appendix_b_params(p: ModelParams) -> tuple[float, float]:
    """Parameters (mu_tilde, k) = (mu*D, 2*alpha/D) under which the rescaled
    system is the stationary problem of u_t = u_xx + mu_tilde*u*(1-u)*(1+k*u)."""
    return (p.mu * p.D, 2.0 * p.alpha / p.D)
