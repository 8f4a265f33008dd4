"""Grid scans over the mass triangle and the charge plane."""

from __future__ import annotations

import csv
import io
import json
import math
import random
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from ..deduce.facts import Rule, Verdict
from ..deduce.rules import CITE, DEFAULT_RULES, RuleBase, _solver_verdict, evaluate_rules, normalize, z_sector
from ..fourbody import ORE_2_0168, abc_verdict
from ..geometry import convex_hull, point_in_hull
from ..systems import VERTEX3, ParticleSystem, SimplexPoint, canonicalize, from_simplex
from ..thresholds import lowest_threshold
from ..varsolve.excess import ExcessBindingTable
from ..varsolve.solver import SolverConfig, certify_numeric, svm_optimize

SIMPLEX_COLUMNS = ("alpha1", "alpha2", "alpha3", "status", "energy", "threshold", "provenance")
CHARGE_COLUMNS = ("q2", "q3", "z2", "z3", "status", "energy", "threshold", "provenance")


@dataclass(frozen=True)
class ScanConfig:
    """How each node is decided.

    ``method="rules"`` never calls the solver; ``"auto"`` runs it on nodes the
    rules leave unknown.  ``rules`` and ``g_table`` feed the deduction engine.
    """

    method: str = "rules"
    solver: SolverConfig = SolverConfig()
    g_table: Optional[ExcessBindingTable] = None
    rules: RuleBase = DEFAULT_RULES
    workers: int = 1

    def to_record(self) -> dict:
        return {
            "method": self.method,
            "solver": self.solver.to_record(),
            "g_table": None if self.g_table is None else {"alpha1": list(self.g_table.alpha1), "g": list(self.g_table.g)},
            "rules_version": self.rules.version,
        }


@dataclass(frozen=True)
class Cell:
    coords: tuple[float, ...]
    verdict: Verdict


@dataclass
class StabilityMap:
    chart: str  # "simplex" (fixed charges) or "charge" (fixed masses)
    h: float
    cells: list[Cell]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.chart not in ("simplex", "charge"):
            raise ValueError(f"unknown chart {self.chart!r}")
        for c in self.cells:
            if self.chart == "simplex":
                SimplexPoint(*c.coords)
            if c.verdict.status != "unknown" and not c.verdict.provenance:
                raise ValueError("every decided cell needs provenance")

    def counts(self) -> dict[str, int]:
        out = {s: 0 for s in ("certified-stable", "certified-unstable", "numerically-stable", "unknown")}
        for c in self.cells:
            out[c.verdict.status] += 1
        return out

    def status_at(self, coords, tol: float = 1e-9) -> Optional[str]:
        for c in self.cells:
            if all(abs(a - b) <= tol for a, b in zip(c.coords, coords)):
                return c.verdict.status
        return None

    @property
    def columns(self) -> tuple[str, ...]:
        return SIMPLEX_COLUMNS if self.chart == "simplex" else CHARGE_COLUMNS

    def rows(self):
        for c in self.cells:
            v = c.verdict
            coords = list(c.coords)
            if self.chart == "charge":
                coords += [1.0 / c.coords[0], 1.0 / c.coords[1]]
            yield coords + [
                v.status,
                "" if v.energy is None else repr(v.energy),
                "" if v.threshold is None else repr(v.threshold),
                "|".join(r.rule for r in v.provenance),
            ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows():
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])
        return buf.getvalue()

    def to_record(self) -> dict:
        cells = []
        for c in self.cells:
            rec = dict(zip(self.columns[: len(c.coords)], c.coords))
            rec.update(
                status=c.verdict.status,
                energy=c.verdict.energy,
                threshold=c.verdict.threshold,
                provenance=[r.to_record() for r in c.verdict.provenance],
            )
            cells.append(rec)
        return {"chart": self.chart, "h": self.h, "metadata": self.metadata, "cells": cells}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=1, sort_keys=True)

    def save(self, csv_path: Optional[str] = None, json_path: Optional[str] = None) -> None:
        if csv_path:
            with open(csv_path, "w", newline="") as fh:
                fh.write(self.to_csv())
        if json_path:
            with open(json_path, "w") as fh:
                fh.write(self.to_json())


def _node_seed(base: int, coords: Sequence[float]) -> int:
    # seeds follow the node, not its index, so refined grids reuse them
    key = ",".join(f"{c:.12f}" for c in coords).encode()
    return base + zlib.crc32(key)


def _parallel(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))  # map keeps input order


def simplex_grid(h: float) -> list[SimplexPoint]:
    """Nodes ``(i, j, k) / n`` with ``n = round(1/h)``, vertices excluded."""
    if not 0.01 <= h <= 0.25:
        raise ValueError("resolution h must lie in [0.01, 0.25]")
    n = round(1.0 / h)
    pts = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            k = n - i - j
            if max(i, j, k) == n:
                continue
            pts.append(SimplexPoint(i / n, j / n, k / n))
    return pts


def _hull_fill(cells: list[Cell], key, fill_rule: Rule) -> list[Cell]:
    """Mark unknown cells inside the hull of certified-unstable ones.

    ``key(cell)`` maps a cell to (group, point); hulls are built per group.
    """
    groups: dict = {}
    for c in cells:
        if c.verdict.status == "certified-unstable":
            for g, p in key(c):
                groups.setdefault(g, []).append(p)
    if not groups:
        return cells
    hulls = {g: convex_hull(pts, g[1]) for g, pts in groups.items()}
    out = []
    for c in cells:
        if c.verdict.status == "unknown":
            for g, p in key(c):
                if g in hulls and point_in_hull(p, hulls[g]):
                    c = Cell(c.coords, Verdict("certified-unstable", (fill_rule,), c.verdict.inputs, log=c.verdict.log + (fill_rule,)))
                    break
        out.append(c)
    return out


def _solve_unknown(cells: list[Cell], config: ScanConfig, cache, make_system) -> list[Cell]:
    todo = [i for i, c in enumerate(cells) if c.verdict.status == "unknown"]

    def run(i):
        c = cells[i]
        sysm = make_system(c.coords)
        if sysm is None:
            return c
        cfg = replace(config.solver, seed=_node_seed(config.solver.seed, c.coords))
        v = _solver_verdict(normalize(sysm), dict(c.verdict.inputs or {}), list(c.verdict.log), cfg, cache)
        return Cell(c.coords, v)

    solved = _parallel(run, todo, config.workers)
    out = list(cells)
    for i, c in zip(todo, solved):
        out[i] = c
    return out


def scan_triangle(q2: float = 1.0, q3: float = 1.0, h: float = 0.05, config: ScanConfig = ScanConfig(), cache=None) -> StabilityMap:
    """Verdict at every node of the triangle for charges (+1, -q2, -q3)."""
    grid = simplex_grid(h)
    charges = (1.0, -q2, -q3)

    def decide(a: SimplexPoint) -> Cell:
        v = evaluate_rules(from_simplex(a, charges), config.rules, config.g_table, method="rules")
        return Cell(a.as_tuple(), v)

    cells = _parallel(decide, grid, config.workers)

    if abs(q2 - q3) <= 1e-12 * max(1.0, q2):
        # convexity and star shape in the left half, mirrored for the right
        def key(c):
            p = SimplexPoint(*c.coords)
            p = p if p.in_left_half else p.swapped()
            return [(("left", "simplex"), p.chart_xy)]

        pts_rule = Rule("convex_hull_instability", f"hull of certified-unstable nodes; {CITE['convex']}; {CITE['star']}")
        seeded = cells + [Cell(VERTEX3.as_tuple(), Verdict("certified-unstable", (pts_rule,)))]
        cells = _hull_fill(seeded, key, pts_rule)[: len(cells)]

    if config.method != "rules":
        cells = _solve_unknown(cells, config, cache, lambda co: from_simplex(SimplexPoint(*co), charges))

    meta = {"q2": q2, "q3": q3, "nodes": len(cells), "config": config.to_record()}
    return StabilityMap("simplex", 1.0 / round(1.0 / h), cells, meta)


def _reduced(m1: float, m: float) -> float:
    if math.isinf(m1):
        return 1.0
    return 1.0 if math.isinf(m) else m / (m1 + m)


def scan_charge_plane(
    masses: Sequence[float],
    q_values: Sequence[float],
    config: ScanConfig = ScanConfig(),
    cache=None,
) -> StabilityMap:
    """Verdicts on the (q2, q3) grid for masses (m1, m2, m3), m2 >= m3."""
    m1, m2, m3 = (float(m) for m in masses)
    if m2 < m3:
        raise ValueError("masses must be canonical: m2 >= m3")
    if any(q <= 0 for q in q_values):
        raise ValueError("charge magnitudes must be positive")
    nodes = [(float(a), float(b)) for a in q_values for b in q_values]

    def make(co):
        return ParticleSystem.from_masses((m1, m2, m3), (1.0, -co[0], -co[1]))

    def decide(co) -> Cell:
        return Cell(co, evaluate_rules(make(co), config.rules, config.g_table, method="rules"))

    cells = _parallel(decide, nodes, config.workers)

    def key(c):
        z = (1.0 / c.coords[0], 1.0 / c.coords[1])
        s = z_sector(z, (m1, m2, m3))
        sectors = (1, -1) if s == 0 else (s,)
        return [((sec, "z"), z) for sec in sectors]

    z_rule = Rule("inverse_charge_convexity", f"hull of certified-unstable nodes; {CITE['zconvex']}")
    cells = _hull_fill(cells, key, z_rule)

    if config.method != "rules":
        cells = _solve_unknown(cells, config, cache, make)

    r2, r3 = _reduced(m1, m2), _reduced(m1, m3)
    meta = {
        "masses": [m1, m2, m3],
        "q_values": [float(q) for q in q_values],
        # q2^2 r2 = q3^2 r3, a ray z3 = slope * z2 in the inverse-charge plane
        "dividing_line": {"r2": r2, "r3": r3, "z_slope": math.sqrt(r3 / r2)},
        "config": config.to_record(),
    }
    h = min((b - a for a, b in zip(sorted(q_values), sorted(q_values)[1:])), default=0.0)
    return StabilityMap("charge", h, cells, meta)


# --- four-body conjecture scan -----------------------------------------------


@dataclass
class ConjectureRow:
    masses: tuple[float, float, float, float]
    subsystems: dict
    four_body: dict
    outcome: str  # consistent | candidate | excluded

    def to_record(self) -> dict:
        return {"masses": list(self.masses), "subsystems": self.subsystems, "four_body": self.four_body, "outcome": self.outcome}


@dataclass
class ConjectureReport:
    rows: list[ConjectureRow]
    seed: int

    @property
    def tally(self) -> dict[str, int]:
        out = {"consistent": 0, "candidate": 0, "excluded": 0}
        for r in self.rows:
            out[r.outcome] += 1
        return out

    def to_record(self) -> dict:
        return {"seed": self.seed, "tally": self.tally, "rows": [r.to_record() for r in self.rows]}


def _four_body_certificate(sys4: ParticleSystem) -> Optional[Verdict]:
    xa, xb, xc, xd = sys4.x  # canonical: two positives then two negatives
    if abs(xc - xd) <= 1e-12 * max(xc, xd, 1e-300) and xc > 0:
        return abc_verdict(xa, xb, xc, ORE_2_0168)
    if abs(xa - xb) <= 1e-12 * max(xa, xb, 1e-300) and xa > 0:
        # charge conjugation swaps the roles of the two pairs
        return abc_verdict(xc, xd, xa, ORE_2_0168)
    return None


def conjecture_scan(
    samples: int = 4,
    seed: int = 0,
    systems: Optional[Sequence[ParticleSystem]] = None,
    three_body: ScanConfig = ScanConfig(method="auto"),
    four_body_solver: SolverConfig = SolverConfig(max_basis=300, candidates_per_step=30),
) -> ConjectureReport:
    """Compare 3-body subsystem verdicts with the 4-body verdict for ++-- systems.

    A row is ``consistent`` when some subsystem is stable and so is the whole
    system; ``candidate`` when a subsystem is stable but the 4-body system is
    not shown stable (one-sided numerics, never a certified counterexample);
    ``excluded`` when no subsystem is shown stable.
    """
    if systems is None:
        rng = random.Random(seed)
        systems = [
            ParticleSystem.from_masses(tuple(10 ** rng.uniform(0.0, 3.3) for _ in range(4)), (1, 1, -1, -1))
            for _ in range(samples)
        ]
    rows = []
    for n, s in enumerate(systems):
        s = canonicalize(s)
        if s.n != 4 or sorted(s.q) != [-1.0, -1.0, 1.0, 1.0]:
            raise ValueError("conjecture scan takes unit-charge two-positive/two-negative systems")
        subs, sub_stable, e3 = {}, False, []
        for drop in range(4):
            keep = [i for i in range(4) if i != drop]
            s3 = ParticleSystem(tuple(s.x[i] for i in keep), tuple(s.q[i] for i in keep))
            cfg = replace(three_body.solver, seed=three_body.solver.seed + 10 * n + drop)
            v = evaluate_rules(s3, three_body.rules, three_body.g_table, method=three_body.method, solver_config=cfg)
            energy = v.energy
            if energy is None and v.status != "certified-unstable" and three_body.method != "rules":
                # rule-certified stable: still need an energy for the 3+1 threshold
                energy = svm_optimize(normalize(s3).sys, cfg).energy
            subs[f"without_{drop}"] = {"status": v.status, "rules": [r.rule for r in v.provenance], "energy": energy}
            sub_stable |= v.status in ("certified-stable", "numerically-stable")
            if energy is not None and v.status != "certified-unstable":
                e3.append(energy)

        cert = _four_body_certificate(s)
        if cert is not None and cert.status == "certified-stable":
            four = {"status": cert.status, "rules": [r.rule for r in cert.provenance]}
        else:
            thr = min([lowest_threshold(s).energy] + e3)
            res = svm_optimize(s, replace(four_body_solver, seed=four_body_solver.seed + n))
            status = "numerically-stable" if certify_numeric(res.energy, thr) else "unknown"
            four = {"status": status, "energy": res.energy, "threshold": thr, "rules": ["variational"] if status != "unknown" else []}
        four_stable = four["status"] in ("certified-stable", "numerically-stable")
        outcome = "excluded" if not sub_stable else ("consistent" if four_stable else "candidate")
        rows.append(ConjectureRow(tuple(s.masses), subs, four, outcome))
    return ConjectureReport(rows, seed)

