"""Command line entry point.

Systems are written as ``mass:charge`` lists, e.g. ``"inf:1, e:-1, e:-1"``
for H-.  Masses may be numbers (electron masses), ``inf`` or particle names.

A configuration file (``--config``) is plain ``key = value`` text in
sections, read with :mod:`configparser`::

    [solver]
    seed = 0
    max_basis = 150
    candidates_per_step = 20

    [scan]
    method = rules
    workers = 1
    cache = runs.jsonl

Command line flags override the file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import replace
from typing import Optional

import numpy as np

from .. import fourbody
from ..deduce.rules import DEFAULT_RULES, evaluate_rules, pz_report
from ..ore import ore_beta_scan
from ..systems import PARTICLE_MASSES, InvalidSystem, parse_system
from ..varsolve.excess import ExcessBindingTable, excess_binding_table
from ..varsolve.solver import SolverConfig, svm_optimize
from .cache import RunCache
from .render import render_beta_scan, render_svg
from .scan import ScanConfig, conjecture_scan, scan_charge_plane, scan_triangle

_INT_KEYS = ("seed", "max_basis", "candidates_per_step", "window")
_FLOAT_KEYS = ("overlap_cutoff", "energy_tol", "min_new_norm")


def load_config(path: Optional[str]) -> tuple[SolverConfig, dict]:
    """Solver settings and scan settings from a key-value file (or defaults)."""
    solver, scan = SolverConfig(), {"method": "rules", "workers": 1, "cache": None}
    if not path:
        return solver, scan
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise SystemExit(f"config file {path!r} not found")
    if cp.has_section("solver"):
        kw = {}
        for k, v in cp.items("solver"):
            if k in _INT_KEYS:
                kw[k] = int(v)
            elif k in _FLOAT_KEYS:
                kw[k] = float(v)
            elif k == "width_range":
                lo, hi = (float(t) for t in v.split(","))
                kw[k] = (lo, hi)
            else:
                raise SystemExit(f"unknown solver key {k!r}")
        solver = replace(solver, **kw)
    if cp.has_section("scan"):
        for k, v in cp.items("scan"):
            if k not in scan:
                raise SystemExit(f"unknown scan key {k!r}")
            scan[k] = int(v) if k == "workers" else v
    return solver, scan


def _mass(tok: str) -> float:
    tok = tok.strip().lower()
    return PARTICLE_MASSES[tok] if tok in PARTICLE_MASSES else float(tok)


def _grid(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" in spec:
        a, b, s = (float(t) for t in spec.split(":"))
        n = int(round((b - a) / s))
        return [round(a + k * s, 12) for k in range(n + 1)]
    return [float(t) for t in spec.split(",")]


def _emit(obj, out: Optional[str] = None) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _solver_from_args(base: SolverConfig, args) -> SolverConfig:
    kw = {}
    for name in ("seed", "max_basis", "candidates_per_step"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return replace(base, **kw)


def _cache(args, scan_cfg) -> Optional[RunCache]:
    path = getattr(args, "cache", None) or scan_cfg.get("cache")
    return RunCache(path) if path else None


# --- subcommands -------------------------------------------------------------


def cmd_verdict(args, solver, scan_cfg) -> int:
    g = ExcessBindingTable.load(args.gtable) if args.gtable else None
    v = evaluate_rules(
        parse_system(args.system), DEFAULT_RULES, g, method=args.method, solver_config=_solver_from_args(solver, args), cache=_cache(args, scan_cfg)
    )
    rec = v.to_record()
    rec["log"] = [r.to_record() for r in v.log]
    _emit(rec, args.out)
    return 0


def cmd_solve(args, solver, scan_cfg) -> int:
    cfg = _solver_from_args(solver, args)
    s = parse_system(args.system)
    cache = _cache(args, scan_cfg)
    res = cache.get_or_solve(s, cfg) if cache is not None else svm_optimize(s, cfg)
    _emit(res.to_record(), args.out)
    return 0


def _scan_config(args, solver, scan_cfg) -> ScanConfig:
    g = ExcessBindingTable.load(args.gtable) if getattr(args, "gtable", None) else None
    return ScanConfig(
        method=args.method or scan_cfg["method"],
        solver=_solver_from_args(solver, args),
        g_table=g,
        workers=args.workers or int(scan_cfg["workers"]),
    )


def _write_map(smap, args, hull=None) -> None:
    smap.save(args.out, args.json)
    if args.svg:
        render_svg(smap, args.svg, hull)
    c = smap.counts()
    print(", ".join(f"{k}: {v}" for k, v in c.items()), file=sys.stderr)


def cmd_map_triangle(args, solver, scan_cfg) -> int:
    cfg = _scan_config(args, solver, scan_cfg)
    smap = scan_triangle(args.q2, args.q3, args.res, cfg, _cache(args, scan_cfg))
    hull = DEFAULT_RULES.unit_hull.geometry if args.q2 == args.q3 == 1.0 else None
    _write_map(smap, args, hull)
    if not args.out:
        sys.stdout.write(smap.to_csv())
    return 0


def cmd_map_charges(args, solver, scan_cfg) -> int:
    cfg = _scan_config(args, solver, scan_cfg)
    masses = [_mass(t) for t in args.masses.split(",")]
    smap = scan_charge_plane(masses, _grid(args.q), cfg, _cache(args, scan_cfg))
    _write_map(smap, args)
    if not args.out:
        sys.stdout.write(smap.to_csv())
    return 0


def cmd_fourbody_check(args, solver, scan_cfg) -> int:
    c = fourbody.BUILTIN_CONSTANTS.get(args.constant) or fourbody.BoundConstant(float(args.constant), "user constant")
    mA, mB, mC = (_mass(t) for t in args.masses.split(","))
    x = [0.0 if math.isinf(m) else 1.0 / m for m in (mA, mB, mC)]
    v = fourbody.abc_verdict(*x, c)
    rec = v.to_record()
    rec["margin"] = fourbody.abc_margin(*x, c)
    rec["masses"] = [mA, mB, mC]
    rec["ratio"] = fourbody.ratio_report(c)
    _emit(rec, args.out)
    return 0


def cmd_fourbody_ratio(args, solver, scan_cfg) -> int:
    c = fourbody.BUILTIN_CONSTANTS.get(args.constant) or fourbody.BoundConstant(float(args.constant), "user constant")
    rep = fourbody.ratio_report(c)
    rep["closed_form"] = fourbody.critical_ratio_closed_form(c)
    _emit(rep, args.out)
    return 0


def cmd_conjecture(args, solver, scan_cfg) -> int:
    three = ScanConfig(method="auto", solver=_solver_from_args(solver, args))
    four = replace(SolverConfig(max_basis=args.four_body_basis, candidates_per_step=30), seed=three.solver.seed)
    rep = conjecture_scan(args.samples, args.seed if args.seed is not None else 0, three_body=three, four_body_solver=four)
    _emit(rep.to_record(), args.out)
    return 0


def cmd_gtable(args, solver, scan_cfg) -> int:
    cfg = _solver_from_args(solver, args)
    table = excess_binding_table(_grid(args.grid), args.charge, cfg, _cache(args, scan_cfg))
    table.save(args.out)
    print(json.dumps(table.to_record()), file=sys.stderr)
    return 0


def cmd_ore(args, solver, scan_cfg) -> int:
    est = ore_beta_scan(tuple(_grid(args.betas)), samples=args.samples, seed=args.seed or 0)
    best = min(est, key=lambda e: e.energy)
    rec = {
        "reference": 2.0168 * -0.25,
        "best_beta": best.beta,
        "best_energy": best.energy,
        "best_stderr": best.stderr,
        "scan": [{"beta": e.beta, "energy": e.energy, "stderr": e.stderr, "acceptance": e.acceptance} for e in est],
    }
    _emit(rec, args.out)
    if args.svg:
        render_beta_scan(est, 2.0168 * -0.25, args.svg)
    return 0


def cmd_report(args, solver, scan_cfg) -> int:
    """Figures, maps and summaries in one directory."""
    os.makedirs(args.outdir, exist_ok=True)
    cfg = _scan_config(args, solver, scan_cfg)

    def path(name):
        return os.path.join(args.outdir, name)

    unit = scan_triangle(1.0, 1.0, args.res, cfg)
    unit.save(path("triangle_unit.csv"), path("triangle_unit.json"))
    render_svg(unit, path("triangle_unit.svg"), DEFAULT_RULES.unit_hull.geometry)
    sub = scan_triangle(0.9, 0.9, args.res, cfg)
    sub.save(path("triangle_q0.9.csv"), path("triangle_q0.9.json"))
    render_svg(sub, path("triangle_q0.9.svg"))
    plane = scan_charge_plane((math.inf, 1.0, 1.0), _grid("0.4:3.0:0.2"), cfg)
    plane.save(path("charges_inf_1_1.csv"), path("charges_inf_1_1.json"))
    render_svg(plane, path("charges_inf_1_1.svg"))
    summary = {
        "triangle_unit": unit.counts(),
        "triangle_q0.9": sub.counts(),
        "charges_inf_1_1": plane.counts(),
        "p_z_family": pz_report(),
        "four_body": [fourbody.ratio_report(c) for c in fourbody.BUILTIN_CONSTANTS.values()],
        "h2_chain": {
            k: getattr(fourbody.equal_mass_chain(1.0 / PARTICLE_MASSES["p"], 1.0), k) for k in ("bound", "threshold", "margin")
        },
    }
    _emit(summary, path("summary.json"))
    print(f"report written to {args.outdir}", file=sys.stderr)
    return 0


# --- parser ------------------------------------------------------------------


def _solver_flags(p) -> None:
    p.add_argument("--seed", type=int, help="random seed for basis growth")
    p.add_argument("--max-basis", dest="max_basis", type=int, help="basis size")
    p.add_argument("--candidates", dest="candidates_per_step", type=int, help="trial functions per step")
    p.add_argument("--cache", help="JSON-lines run cache")


def _map_flags(p) -> None:
    p.add_argument("--method", choices=("rules", "auto"), help="'auto' runs the solver where rules are silent")
    p.add_argument("--gtable", help="excess binding table (JSON) for the axis band rule")
    p.add_argument("--workers", type=int, help="concurrent node evaluations")
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.add_argument("--json", help="JSON output")
    p.add_argument("--svg", help="SVG figure")
    _solver_flags(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coulomb-stability", description="Stability of three- and four-body Coulomb systems.")
    ap.add_argument("--config", help="key-value configuration file")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verdict", help="deduce (or compute) stability of one system")
    p.add_argument("system", help='e.g. "inf:1, e:-1, e:-1"')
    p.add_argument("--method", choices=("rules", "variational", "auto"), default="rules")
    p.add_argument("--gtable", help="excess binding table (JSON)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    _solver_flags(p)
    p.set_defaults(func=cmd_verdict)

    p = sub.add_parser("solve", help="variational energy of one system")
    p.add_argument("system")
    p.add_argument("--out")
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("map", help="stability maps")
    msub = p.add_subparsers(dest="chart", required=True)
    t = msub.add_parser("triangle", help="mass triangle at fixed charges")
    t.add_argument("--q2", type=float, default=1.0)
    t.add_argument("--q3", type=float, default=1.0)
    t.add_argument("--res", type=float, default=0.05, help="grid spacing h in [0.01, 0.25]")
    _map_flags(t)
    t.set_defaults(func=cmd_map_triangle)
    c = msub.add_parser("charges", help="(q2, q3) plane at fixed masses")
    c.add_argument("--masses", required=True, help="m1,m2,m3 with m2 >= m3")
    c.add_argument("--q", default="0.4:3.0:0.2", help="charge grid start:stop:step or list")
    _map_flags(c)
    c.set_defaults(func=cmd_map_charges)

    p = sub.add_parser("fourbody", help="four-body certificates")
    fsub = p.add_subparsers(dest="action", required=True)
    f = fsub.add_parser("check", help="A+ B+ C- C- certificate")
    f.add_argument("--masses", required=True, help="mA,mB,mC")
    f.add_argument("--constant", default="2.0168", help="2.0168, 2.06392 or any value > 2")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fourbody_check)
    f = fsub.add_parser("ratio", help="critical m_B/m_C for a bound constant")
    f.add_argument("--constant", default="2.0168")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fourbody_ratio)

    p = sub.add_parser("conjecture", help="subsystem versus four-body stability")
    csub = p.add_subparsers(dest="action", required=True)
    s = csub.add_parser("scan")
    s.add_argument("--samples", type=int, default=4)
    s.add_argument("--four-body-basis", dest="four_body_basis", type=int, default=300)
    s.add_argument("--out")
    _solver_flags(s)
    s.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("gtable", help="tabulate the axis excess binding g(a1)")
    p.add_argument("--grid", default="0.8:0.9:0.01", help="a1 grid start:stop:step or list")
    p.add_argument("--charge", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _solver_flags(p)
    p.set_defaults(func=cmd_gtable)

    p = sub.add_parser("ore", help="Metropolis beta scan of the four-body trial function")
    p.add_argument("--betas", default="0:0.9:0.1")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_ore)

    p = sub.add_parser("report", help="standard maps, figures and summaries")
    p.add_argument("--outdir", default="report")
    p.add_argument("--res", type=float, default=0.05)
    p.add_argument("--method", choices=("rules", "auto"))
    p.add_argument("--gtable")
    p.add_argument("--workers", type=int)
    _solver_flags(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    solver, scan_cfg = load_config(args.config)
    try:
        return args.func(args, solver, scan_cfg)
    except InvalidSystem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
