"""Static SVG rendering of the compactified phase portrait.

Points map to the disk by the weighted scaling (u, v) -> (u/(1+rho),
v/(1+rho)^2) with rho = (u^4 + v^2)^(1/4), so infinity lands on the closed
curve X^4 + Y^2 = 1 in the correct direction. Visualization only; no
computation happens in these coordinates.
"""

from __future__ import annotations

import math

import numpy as np

from . import __version__ as _version
from .classify import ConnectionGraph
from .equilibria import Stability, all_equilibria
from .model import ModelParams

__all__ = ["disk_coords", "render_portrait"]

_SIZE = 720.0
_WORLD = 1.18  # world half-width; the boundary curve has |X|,|Y| <= 1

_STABILITY_COLOR = {
    Stability.SADDLE: "#d62728",
    Stability.CENTER: "#1f77b4",
    Stability.UNSTABLE_NODE: "#9467bd",
    Stability.STABLE_NODE: "#2ca02c",
}


def disk_coords(u, v):
    """Map interior coordinates to the unit disk model."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    rho = np.sqrt(np.sqrt(u ** 4 + v * v))
    return u / (1.0 + rho), v / (1.0 + rho) ** 2


def _px(x, y):
    sx = (x + _WORLD) / (2.0 * _WORLD) * _SIZE
    sy = (_WORLD - y) / (2.0 * _WORLD) * _SIZE
    return sx, sy


def _fmt(val: float) -> str:
    return f"{val:.2f}"


def _polyline(xs, ys, color: str, width: float = 1.2, dash: str | None = None,
              max_pts: int = 400) -> str:
    n = len(xs)
    if n > max_pts:
        idx = np.unique(np.linspace(0, n - 1, max_pts).astype(int))
        xs, ys = np.asarray(xs)[idx], np.asarray(ys)[idx]
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(*_px(np.asarray(xs),
                                                               np.asarray(ys))))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
            f'{dash_attr} points="{pts}"/>')


def _edge_color(source: str, target: str) -> str:
    finite = {"E1", "E2"}
    if source in finite and target in finite:
        return "#d62728"          # saddle connections: the regime signature
    if source in finite or target in finite:
        return "#ff7f0e"          # saddle <-> infinity separatrices
    return "#8c8c8c"              # generic families


def render_portrait(graph: ConnectionGraph, path: str,
                    n_periodic: int = 3, seed: int = 0) -> list[str]:
    """Write the portrait SVG; returns the list of orbit CSV files written
    alongside it (one per plotted connecting orbit)."""
    from .orbits import detect_period

    p = graph.params
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- pldisk portrait v{_version} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_SIZE)}" '
        f'height="{int(_SIZE)}" viewBox="0 0 {int(_SIZE)} {int(_SIZE)}">',
        f'<rect width="{int(_SIZE)}" height="{int(_SIZE)}" fill="white"/>',
    ]

    # Boundary of the disk: X^4 + Y^2 = 1, parameterized by the angle.
    t = np.linspace(0.0, 2.0 * math.pi, 361)
    bx = np.sign(np.cos(t)) * np.sqrt(np.abs(np.cos(t)))
    by = np.sin(t)
    parts.append(_polyline(bx, by, "#000000", 1.6))

    # Axes through the origin.
    for xs, ys in (((-1.0, 1.0), (0.0, 0.0)), ((0.0, 0.0), (-1.0, 1.0))):
        parts.append(_polyline(np.array(xs), np.array(ys), "#dddddd", 0.8))

    # Singular line u = -D/(2 alpha).
    vgrid = np.concatenate([-np.geomspace(1e4, 1e-3, 120), [0.0],
                            np.geomspace(1e-3, 1e4, 120)])
    sx, sy = disk_coords(np.full_like(vgrid, p.u_singular), vgrid)
    parts.append(_polyline(sx, sy, "#b0a000", 1.0, dash="5,4"))

    # Connecting orbits.
    csv_files = []
    stem = path[:-4] if path.endswith(".svg") else path
    for e in sorted(graph.edges, key=lambda e: e.key()):
        taus, uv = e.orbit.interior_samples()
        order = np.argsort(taus)
        ox, oy = disk_coords(uv[order, 0], uv[order, 1])
        parts.append(_polyline(ox, oy, _edge_color(e.source, e.target), 1.4))
        csv_path = f"{stem}_{e.source}_to_{e.target}.csv"
        e.orbit.to_csv(csv_path)
        csv_files.append(csv_path)

    # A few closed orbits around the center.
    from .classify import periodic_annulus_edge

    rng = np.random.default_rng(seed)
    edge = periodic_annulus_edge(p)
    for frac in sorted(rng.uniform(0.15, 0.85, n_periodic)):
        try:
            _, orb = detect_period(p, frac * edge)
        except Exception:
            continue
        seg = orb.segments[0]
        ox, oy = disk_coords(seg.y[:, 0], seg.y[:, 1])
        parts.append(_polyline(ox, oy, "#1f77b4", 0.9))

    # Equilibria: corner pairs render at the same boundary point.
    drawn = {}
    for eq in all_equilibria(p):
        if eq.frame == "interior":
            X, Y = disk_coords(eq.location[0], eq.location[1])
        else:
            uv = _corner_direction(p, eq.id)
            X, Y = uv
        key = (round(float(X), 6), round(float(Y), 6))
        if key in drawn:
            drawn[key] = (drawn[key][0] + "/" + eq.id, drawn[key][1])
            continue
        drawn[key] = (eq.id, _STABILITY_COLOR[eq.stability])
    for (X, Y), (label, color) in sorted(drawn.items()):
        cx, cy = _px(X, Y)
        parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5" '
                     f'fill="{color}" stroke="black" stroke-width="0.8"/>')
        lx = min(max(cx + 8.0, 10.0), _SIZE - 60.0)
        ly = min(max(cy - 8.0, 14.0), _SIZE - 8.0)
        parts.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" '
                     f'font-family="monospace" font-size="13">{label}</text>')

    parts.append(
        f'<text x="10" y="{int(_SIZE) - 10}" font-family="monospace" '
        f'font-size="12">D={p.D:g} alpha={p.alpha:g} mu={p.mu:g}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return csv_files


def _corner_direction(p: ModelParams, eid: str):
    """Boundary-point coordinates of an infinity equilibrium on the disk."""
    s = p.sqrt_alpha_mu
    den = math.sqrt(math.sqrt(1.0 + s * s))
    X = 1.0 / den
    Y = s / (den * den)
    signs = {"E3": (1, -1), "E9": (1, -1), "E4": (1, 1), "E8": (1, 1),
             "E5": (-1, 1), "E7": (-1, 1), "E6": (-1, -1), "E10": (-1, -1)}[eid]
    return signs[0] * X, signs[1] * Y
