"""Command-line surface: equilibria tables, portraits, shooting, regime
classification, changeover scans and the invariant self-check.

Exit codes: 0 success, 1 invariant/assertion failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import BracketError, ParameterDomainError, PldiskError
from .model import (ModelParams, conserved_H, field_tau, field_x,
                    quasi_homogeneity_check, time_rescale_factor)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(Exception):
    pass


def _add_param_flags(sp, need_params=True):
    sp.add_argument("--D", type=float, default=None, help="linear diffusion coefficient")
    sp.add_argument("--alpha", type=float, default=None, help="self-diffusion coefficient")
    sp.add_argument("--mu", type=float, default=None, help="growth rate")
    sp.add_argument("--config", default=None, help="JSON config file; flags override it")
    sp.add_argument("--out", default=None, help="output path (stdout when omitted)")
    sp.add_argument("--format", default=None, choices=["json", "csv", "svg"])
    sp.add_argument("--tol", type=float, default=1e-10, help="integrator relative tolerance")
    sp.add_argument("--epsilon", type=float, default=None, help="manifold launch offset")
    sp.add_argument("--mode", default="x", choices=["x", "tau"])
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(need_params=need_params)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pldisk",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pldisk {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("equilibria", help="table of all eleven equilibria")
    _add_param_flags(sp)

    sp = sub.add_parser("portrait", help="SVG phase portrait on the disk + CSV bundle")
    _add_param_flags(sp)
    sp.add_argument("--periodic-orbits", type=int, default=3)

    sp = sub.add_parser("shoot", help="launch one manifold branch and report the orbit")
    _add_param_flags(sp)
    sp.add_argument("--eq", default="E2", help="equilibrium id (E1..E6)")
    sp.add_argument("--branch", default="unstable_plus",
                    help="unstable_plus|unstable_minus|stable_plus|stable_minus")

    sp = sub.add_parser("classify", help="regime report against the predicted type sets")
    _add_param_flags(sp)

    sp = sub.add_parser("scan", help="locate the homoclinic/heteroclinic changeover D*")
    _add_param_flags(sp, need_params=False)
    sp.add_argument("--D-min", type=float, default=None)
    sp.add_argument("--D-max", type=float, default=None)
    sp.add_argument("--no-validate", action="store_true",
                    help="skip the connection-graph flip cross-check")

    sp = sub.add_parser("check", help="run the invariant self-check suite")
    _add_param_flags(sp)
    return ap


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    known = {"D", "alpha", "mu", "out", "format", "tol", "epsilon", "mode",
             "seed", "eq", "branch", "D_min", "D_max", "periodic_orbits"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _merged(args, cfg, key, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    return cfg.get(key, default)


def _params_from(args, cfg) -> ModelParams:
    vals = {k: _merged(args, cfg, k) for k in ("D", "alpha", "mu")}
    missing = [k for k, v in vals.items() if v is None]
    if missing:
        raise ConfigError(f"missing parameters: {missing} (flags or config)")
    try:
        return ModelParams(vals["D"], vals["alpha"], vals["mu"])
    except ParameterDomainError as exc:
        raise ConfigError(str(exc)) from exc


def _check_format(args, cfg, allowed: tuple[str, ...]) -> str:
    fmt = _merged(args, cfg, "format", allowed[0])
    if fmt not in allowed:
        raise ConfigError(
            f"{args.command} supports --format {'|'.join(allowed)}, got {fmt!r}")
    return fmt


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            print(f"error: cannot write {out}: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_IO)
    else:
        print(text)


def _effective(args, cfg, p: ModelParams | None, extra=None) -> dict:
    eff = {"command": args.command, "tol": _merged(args, cfg, "tol", 1e-10),
           "mode": _merged(args, cfg, "mode", "x"),
           "seed": _merged(args, cfg, "seed", 0), "version": __version__}
    if p is not None:
        eff.update(p.to_json())
    if extra:
        eff.update(extra)
    return eff


def cmd_equilibria(args, cfg) -> int:
    from .equilibria import all_equilibria

    _check_format(args, cfg, ("json",))
    p = _params_from(args, cfg)
    payload = {"config": _effective(args, cfg, p),
               "equilibria": [eq.to_json() for eq in all_equilibria(p)]}
    _emit(payload, _merged(args, cfg, "out"))
    return EXIT_OK


def cmd_portrait(args, cfg) -> int:
    from .classify import connection_graph
    from .render import render_portrait

    _check_format(args, cfg, ("svg",))
    p = _params_from(args, cfg)
    out = _merged(args, cfg, "out")
    if not out:
        print("error: portrait needs --out <file.svg>", file=sys.stderr)
        return EXIT_IO
    graph = connection_graph(p, rtol=_merged(args, cfg, "tol", 1e-10),
                             epsilon=_merged(args, cfg, "epsilon"))
    try:
        csvs = render_portrait(graph, out,
                               n_periodic=_merged(args, cfg, "periodic_orbits", 3),
                               seed=_merged(args, cfg, "seed", 0))
    except OSError as exc:
        print(f"error: cannot write portrait: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"config": _effective(args, cfg, p), "svg": out,
                      "orbit_csv": csvs}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_shoot(args, cfg) -> int:
    from .orbits import fit_asymptotics, reparameterize_to_x, shoot_saddle

    fmt = _check_format(args, cfg, ("json", "csv"))
    p = _params_from(args, cfg)
    eq = _merged(args, cfg, "eq", "E2")
    branch = _merged(args, cfg, "branch", "unstable_plus")
    tol = _merged(args, cfg, "tol", 1e-10)
    orbit = shoot_saddle(p, eq, branch, epsilon=_merged(args, cfg, "epsilon"),
                         rtol=tol, atol=tol * 1e-2)
    payload = {"config": _effective(args, cfg, p, {"eq": eq, "branch": branch}),
               "orbit": orbit.to_json(), "fits": []}
    mode = _merged(args, cfg, "mode", "x")
    if mode == "x":
        try:
            ox = reparameterize_to_x(orbit)
            payload["orbit_x"] = ox.to_json()
            for form, side, level in (("exp_growth", "+", None),
                                      ("exp_decay", "-", 1.0),
                                      ("exp_decay", "+", 1.0),
                                      ("linear_hit", "-", None),
                                      ("linear_hit", "+", None)):
                try:
                    payload["fits"].append(
                        fit_asymptotics(ox, form, side, level=level).to_json())
                except PldiskError:
                    pass
        except PldiskError as exc:
            payload["orbit_x"] = {"error": str(exc)}
    out = _merged(args, cfg, "out")
    if fmt == "csv":
        if not out:
            print("error: shoot --format csv needs --out", file=sys.stderr)
            return EXIT_IO
        try:
            orbit.to_csv(out)
        except OSError as exc:
            print(f"error: cannot write {out}: {exc}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK
    _emit(payload, out)
    if out:
        orbit.to_csv(out + ".csv" if not out.endswith(".json")
                     else out[:-5] + ".csv")
    return EXIT_OK


def cmd_classify(args, cfg) -> int:
    from .classify import regime_report

    _check_format(args, cfg, ("json",))
    p = _params_from(args, cfg)
    rep = regime_report(p, _merged(args, cfg, "mode", "x"),
                        rtol=_merged(args, cfg, "tol", 1e-10),
                        epsilon=_merged(args, cfg, "epsilon"))
    payload = {"config": _effective(args, cfg, p)}
    payload.update(rep.to_json())
    _emit(payload, _merged(args, cfg, "out"))
    return EXIT_OK


def cmd_scan(args, cfg) -> int:
    from .classify import bifurcation_scan

    _check_format(args, cfg, ("json",))
    alpha = _merged(args, cfg, "alpha")
    mu = _merged(args, cfg, "mu")
    d_min = _merged(args, cfg, "D_min")
    d_max = _merged(args, cfg, "D_max")
    if None in (alpha, mu, d_min, d_max):
        raise ConfigError("scan needs --alpha --mu --D-min --D-max")
    try:
        res = bifurcation_scan(alpha, mu, (d_min, d_max),
                               validate=not getattr(args, "no_validate", False))
    except BracketError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {"config": _effective(args, cfg, None,
                                    {"alpha": alpha, "mu": mu,
                                     "D_min": d_min, "D_max": d_max})}
    payload.update(res.to_json())
    from .classify import saddle_level_gap

    payload["g_signs"] = {
        "below": math.copysign(1.0, saddle_level_gap(res.D_star * 0.9, alpha, mu)),
        "above": math.copysign(1.0, saddle_level_gap(res.D_star * 1.1, alpha, mu)),
    }
    _emit(payload, _merged(args, cfg, "out"))
    return EXIT_OK


def cmd_check(args, cfg) -> int:
    from .charts import (ChartId, from_chart, pushforward_consistency_residual,
                         to_chart)
    from .classify import periodic_annulus_edge
    from .equilibria import all_equilibria, jacobian_field, numerical_jacobian
    from .orbits import detect_period, shoot_saddle

    p = _params_from(args, cfg)
    tol = _merged(args, cfg, "tol", 1e-10)
    results: list[tuple[str, bool, str]] = []

    def record(name, ok, detail=""):
        results.append((name, bool(ok), detail))

    rep = quasi_homogeneity_check(p, (1.0, 1.0))
    slope = rep.log_slope()
    # Generic parameters decay at first order (slope -1); on the critical
    # line the first-order term vanishes and the decay steepens to -2.
    record("quasi_homogeneity_decay", rep.decays and slope <= -0.9,
           f"slope={slope:.4f}")

    worst = 0.0
    for chart, pt in ((ChartId.U1, (8.0, 3.0)), (ChartId.V1, (-8.0, 3.0)),
                      (ChartId.U2, (1.5, 60.0)), (ChartId.V2, (1.5, -60.0))):
        worst = max(worst, pushforward_consistency_residual(p, pt, chart))
    record("chart_field_consistency", worst <= 1e-9, f"residual={worst:.3e}")

    worst = 0.0
    for eq in all_equilibria(p):
        Jn = numerical_jacobian(jacobian_field(p, eq), eq.location)
        lam_n = sorted(np.linalg.eigvals(Jn), key=lambda z: (z.real, z.imag))
        lam_c = sorted(eq.eigenvalues, key=lambda z: (z.real, z.imag))
        worst = max(worst, max(abs(complex(x) - complex(y))
                               for x, y in zip(lam_c, lam_n)))
    record("jacobian_cross_check", worst <= 1e-6, f"max_err={worst:.3e}")

    u0 = 0.4 * periodic_annulus_edge(p)
    _, orb = detect_period(p, u0, rtol=tol)
    abs_drift, rel_drift = orb.h_drift()
    h0 = conserved_H(p, orb.segments[0].y[0])
    ok_h = abs_drift <= 100.0 * tol * (1.0 + abs(h0)) and rel_drift <= 1e-8
    record("h_conservation_periodic", ok_h,
           f"abs={abs_drift:.3e} rel={rel_drift:.3e}")

    orb2 = shoot_saddle(p, "E2", "unstable_plus", rtol=tol)
    _, rel2 = orb2.h_drift()
    record("h_conservation_separatrix", rel2 <= 1e-8, f"rel={rel2:.3e}")

    f = field_tau(p, (1.3, 0.7))
    fr = field_tau(p, (1.3, -0.7))
    rev = math.hypot(fr[0] + f[0], fr[1] - f[1])
    record("reversal_equivariance", rev <= 1e-14, f"residual={rev:.3e}")

    g = field_tau(p, (1.0, 1.0))
    gm = field_tau(p, (-1.0, 1.0))
    mir = math.hypot(gm[0] - g[0], gm[1] + g[1])
    critical = abs(p.D - 2.0 * p.alpha) <= 1e-12 * (1.0 + 2.0 * p.alpha)
    record("mirror_equivariance",
           (mir <= 1e-12) if critical else (mir > 1e-12),
           f"residual={mir:.3e} (critical={critical})")

    w = time_rescale_factor(p, 0.7)
    fx = field_x(p, (0.7, 0.9))
    ft = field_tau(p, (0.7, 0.9))
    par = math.hypot(ft[0] - w * fx[0], ft[1] - w * fx[1]) / (1.0 + math.hypot(*ft))
    record("field_parallelism", par <= 1e-13, f"residual={par:.3e}")

    worst = 0.0
    for chart, pt in ((ChartId.U1, (2.0, 8.0)), (ChartId.V1, (-2.0, 8.0)),
                      (ChartId.U2, (0.5, 4.0)), (ChartId.V2, (0.5, -4.0))):
        back = from_chart(to_chart(chart, pt))
        worst = max(worst, abs(back.u - pt[0]), abs(back.v - pt[1]))
    record("chart_round_trip", worst <= 1e-12, f"max_err={worst:.3e}")

    all_ok = all(ok for _, ok, _ in results)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")
    print(f"check: {'all invariants hold' if all_ok else 'INVARIANT FAILURE'}")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


_DISPATCH = {"equilibria": cmd_equilibria, "portrait": cmd_portrait,
             "shoot": cmd_shoot, "classify": cmd_classify, "scan": cmd_scan,
             "check": cmd_check}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _load_config(args)
        return _DISPATCH[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
