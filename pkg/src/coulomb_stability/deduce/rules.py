"""Deduction rules over the inverse-mass triangle and the inverse-charge plane.

The engine only ever propagates instability from cited facts; numerical
upper bounds can establish binding but never its absence.  Facts are applied
in the left half of the triangle (a2 <= a3, particle 2 the heavier); systems
in the right half are mirrored first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..geometry import Line, Polygon, as_xy, convex_hull, line_intersect_edge, point_in_hull
from ..systems import (
    TOL,
    VERTEX2,
    VERTEX3,
    ChartError,
    ParticleSystem,
    SimplexPoint,
    canonicalize,
    to_simplex,
)
from ..thresholds import DegenerateLimit, lowest_threshold
from ..varsolve.excess import ExcessBindingTable
from .facts import Fact, Rule, Verdict, point_fact

# Literature anchors, masses relative to the electron or to the negative particle.
GLASER_MASS_RATIO = 1.57  # p_inf A- e-: unstable once m_A- > 1.57 m_e
ARMOUR_SCHRADER_RATIO = 1.51  # p_inf A+ B-: unstable once m_A+/m_B- < 1.51
BO_CRITICAL_CHARGE = 1.24  # Born-Oppenheimer limit loses binding above it
BAND_SPLIT_WINDOW = (1.0, 1.1)  # q2 = q3 where the stable band breaks in two
QUOTED_PZ_RATIO = 2.2

CITE = {
    "glaser": f"Glaser et al.: p_inf A- e- unbound for m_A- > {GLASER_MASS_RATIO} m_e",
    "armour": f"Armour-Schrader: p_inf A+ B- unbound for m_A+/m_B- < {ARMOUR_SCHRADER_RATIO}",
    "star": "instability region star-shaped w.r.t. vertex 3 (Feynman-Hellmann in x3 plus scaling)",
    "convex": "instability region convex in the left half-triangle (concavity in inverse masses)",
    "ratio": "level sets E(123)/E(12) <= 1+eps convex in the left half-triangle",
    "zconvex": "instability regions convex in (1/q2, 1/q3) within each threshold sector",
    "hill": "Hill: equal masses of the two like unit charges imply binding",
    "subunit": "q2, q3 < 1: the compact (1j) atom keeps a long-range pull on the third particle",
    "hogreve": f"Hogreve: Born-Oppenheimer limit unbound for q > {BO_CRITICAL_CHARGE}",
    "equal_q": f"q2 = q3 > {BO_CRITICAL_CHARGE}: axis unbound by concavity, whole triangle by star shape",
    "heavy_q": (
        f"larger charge > {BO_CRITICAL_CHARGE} on the heavier particle: charge-plane concavity at m2 = m3, "
        "then star shape toward the lighter particle"
    ),
    "lieb": "Lieb: a point charge binds fewer than 2Z+1 unit charges; 1/q2 + 1/q3 <= 1 unbound at a1 = 0, a2 = a3",
    "large_q": "q2, q3 > 2: axis unbound by convexity between the Born-Oppenheimer and Lieb points",
    "band": "concavity along a1 = const bounds E(123) by the axis excess binding g(a1)",
    "variational": "variational upper bound below the lowest threshold",
}


def _simplex(p) -> SimplexPoint:
    if isinstance(p, SimplexPoint):
        return p
    u, v = as_xy(p)
    return SimplexPoint(u, v, max(0.0, 1.0 - u - v))


def glaser_point() -> SimplexPoint:
    """p_inf A- e- at the critical mass: x = (0, 1/1.57, 1)."""
    return SimplexPoint.normalized(0.0, 1.0 / GLASER_MASS_RATIO, 1.0)


def armour_schrader_point() -> SimplexPoint:
    """p_inf A+ B- at the critical ratio, canonical order (B, p, A)."""
    return SimplexPoint.normalized(1.0, 0.0, 1.0 / ARMOUR_SCHRADER_RATIO)


# --- fact operations ---------------------------------------------------------


def star_extend(fact: Fact, vertex: SimplexPoint = VERTEX3) -> Fact:
    """Unstable point -> unstable segment to vertex 3 (left half) or vertex 2 (right half)."""
    if fact.chart != "simplex":
        raise ChartError("star extension is defined in the simplex chart")
    if fact.status != "unstable":
        raise ValueError("only unstable (or limit-of-stability) facts extend")
    if vertex not in (VERTEX3, VERTEX2):
        raise ValueError("star extension goes toward vertex 3 or, mirrored, vertex 2")
    pts = [_simplex(v) for v in fact.geometry.vertices]
    want_left = vertex == VERTEX3
    for p in pts:
        if (p.in_left_half if want_left else p.swapped().in_left_half) is False:
            raise ValueError("fact lies in the wrong half of the triangle for this vertex")
    hull = convex_hull(pts + [vertex])
    return Fact(hull, "unstable", f"{fact.citation}; {CITE['star']}", charges=fact.charges)


def _check_same(facts: Sequence[Fact], chart: str) -> None:
    if not facts:
        raise ValueError("no facts to combine")
    for f in facts:
        if f.chart != chart:
            raise ChartError(f"fact in chart {f.chart}, expected {chart}")
    if len({f.charges for f in facts}) > 1 and chart == "simplex":
        raise ValueError("facts at different charges cannot be combined")


def z_sector(z: tuple[float, float], masses: Sequence[float]) -> int:
    """+1 where channel (12) is lower, -1 where (13) is, 0 on the dividing line.

    ``masses`` are (m1, m2, m3), possibly infinite.
    """
    m1, m2, m3 = masses

    def red(m):  # m_j / (m1 + m_j), i.e. reduced mass over m1
        if math.isinf(m1):
            return 1.0
        return 1.0 if math.isinf(m) else m / (m1 + m)

    q2, q3 = 1.0 / z[0], 1.0 / z[1]
    d = q2 * q2 * red(m2) - q3 * q3 * red(m3)
    if abs(d) <= 1e-12 * max(1.0, q2 * q2, q3 * q3):
        return 0
    return 1 if d > 0 else -1


def hull_unstable(facts: Sequence[Fact], chart: str = "simplex", masses: Optional[Sequence[float]] = None) -> Fact:
    """Convex hull of unstable facts, valid within one half-triangle or one z-sector."""
    _check_same(facts, chart)
    if any(f.status != "unstable" for f in facts):
        raise ValueError("hull_unstable combines unstable facts only")
    pts = [v for f in facts for v in f.geometry.vertices]
    if chart == "simplex":
        halves = {_half(_simplex(p)) for p in pts} - {0}
        if len(halves) > 1:
            raise ValueError("facts straddle both half-triangles; convexity holds per half")
        cite = CITE["convex"]
    else:
        if masses is None:
            raise ValueError("z-chart hulls need the fixed masses to check sectors")
        sectors = {z_sector(p, masses) for p in pts} - {0}
        if len(sectors) > 1:
            raise ValueError("facts straddle the dividing line; convexity holds per sector")
        cite = CITE["zconvex"]
    sources = "; ".join(sorted({f.citation for f in facts}))
    return Fact(convex_hull(pts, chart), "unstable", f"{sources}; {cite}", charges=facts[0].charges)


def _half(p: SimplexPoint) -> int:
    d = p.a3 - p.a2
    if abs(d) <= TOL:
        return 0
    return 1 if d > 0 else -1


def ratio_hull(facts: Sequence[Fact], epsilon: float) -> Fact:
    if epsilon == 0:
        return hull_unstable(facts)
    _check_same(facts, "simplex")
    for f in facts:
        if f.status != "ratio-level" or abs(f.epsilon - epsilon) > 1e-15:
            raise ValueError("all facts must be ratio-level with the same epsilon")
        if not f.in_left_half:
            raise ValueError("ratio-level convexity is stated for the left half")
    pts = [v for f in facts for v in f.geometry.vertices]
    return Fact(convex_hull(pts), "ratio-level", CITE["ratio"], epsilon=epsilon, charges=facts[0].charges)


@dataclass(frozen=True)
class MassFamily:
    """One-parameter family of systems lying on a straight line of the triangle."""

    name: str
    alpha: Callable[[float], SimplexPoint]
    param: Callable[[SimplexPoint], float]
    line: Line


def pz_family() -> MassFamily:
    """p z+ z- with rho = m_p/m_z; canonical order (z-, p, z+) gives a1 = a3."""
    return MassFamily(
        "p z+ z-",
        lambda rho: SimplexPoint.normalized(rho, 1.0, rho),
        lambda a: math.inf if a.a2 <= TOL else (1.0 - a.a2) / (2.0 * a.a2),
        Line(2.0, 1.0, 1.0),
    )


def line_boundary(family: MassFamily, hull: Polygon) -> Optional[float]:
    """Smallest family parameter where the family line meets the hull boundary."""
    pts = line_intersect_edge(family.line, hull)
    if not pts:
        return None
    return min(family.param(_simplex(p)) for p in pts)


def lieb_point_rule(q2: float, q3: float) -> Optional[Fact]:
    if q2 <= 0 or q3 <= 0:
        raise ValueError("charge magnitudes must be positive")
    if 1.0 / q2 + 1.0 / q3 <= 1.0 + TOL:
        return point_fact(SimplexPoint(0.0, 0.5, 0.5), "unstable", CITE["lieb"], charges=(q2, q3))
    return None


def axis_band_certify(alpha: SimplexPoint, table: ExcessBindingTable) -> Verdict:
    """Stability from the axis excess binding: 1/(a1+a2) < (1+g(a1)) 2/(1+a1)."""
    if not alpha.in_left_half:
        alpha = alpha.swapped()
    inputs = {"alpha": list(alpha.as_tuple())}
    if abs(alpha.a2 - alpha.a3) <= TOL:
        return Verdict("certified-stable", (Rule("hill", CITE["hill"]),), inputs)
    g = table.lookup(alpha.a1)
    if g is None:
        inputs["diagnostic"] = f"a1 = {alpha.a1:.6g} outside table range [{table.alpha1[0]}, {table.alpha1[-1]}]"
        return Verdict("unknown", (), inputs)
    need = (1.0 + alpha.a1) / (2.0 * (alpha.a1 + alpha.a2)) - 1.0
    inputs.update(g=g, g_needed=need)
    if g > need:
        return Verdict(
            "certified-stable",
            (
                Rule("hill", CITE["hill"]),
                Rule("axis_band", f"{CITE['band']}; g({alpha.a1:.4f}) >= {g:.4f} > {need:.4f} needed"),
            ),
            inputs,
        )
    return Verdict("unknown", (), inputs)


# --- rule base ---------------------------------------------------------------


@dataclass(frozen=True)
class RuleBase:
    """Anchor facts plus any user-supplied ones; immutable after construction."""

    extra_facts: tuple[Fact, ...] = ()
    version: str = "1"
    anchors: tuple[Fact, ...] = field(init=False)
    unit_hull: Fact = field(init=False)

    def __post_init__(self):
        x = point_fact(armour_schrader_point(), "unstable", CITE["armour"])
        y = point_fact(glaser_point(), "unstable", CITE["glaser"])
        v3 = point_fact(VERTEX3, "unstable", "vertex 3: two infinitely heavy opposite charges exert no net pull")
        object.__setattr__(self, "anchors", (x, y, v3))
        hull = hull_unstable([star_extend(x), star_extend(y), v3])
        object.__setattr__(self, "unit_hull", hull)

    def unstable_regions(self, q2: float, q3: float) -> list[Fact]:
        out = []
        if _close(q2, 1.0) and _close(q3, 1.0):
            out.append(self.unit_hull)
        for f in self.extra_facts:
            if f.status == "unstable" and f.chart == "simplex" and _close(f.charges[0], q2) and _close(f.charges[1], q3):
                out.append(f)
        return out


DEFAULT_RULES = RuleBase()


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class NormalizedTriple:
    sys: ParticleSystem  # canonical
    alpha: SimplexPoint
    q2: float  # magnitudes relative to q1
    q3: float


def normalize(sys: ParticleSystem) -> NormalizedTriple:
    c = canonicalize(sys)
    if c.n != 3:
        raise ValueError("rule evaluation needs a three-body system")
    q1 = c.q[0]
    return NormalizedTriple(c, to_simplex(c), -c.q[1] / q1, -c.q[2] / q1)


def _charge_rules(t: NormalizedTriple) -> list[tuple[str, Rule]]:
    q2, q3, a = t.q2, t.q3, t.alpha
    x2, x3 = t.sys.x[1], t.sys.x[2]
    hits = []
    if q2 < 1.0 and q3 < 1.0:
        hits.append(("certified-stable", Rule("subunit_charges", CITE["subunit"])))
    if _close(q2, q3) and q2 > BO_CRITICAL_CHARGE:
        hits.append(("certified-unstable", Rule("equal_charges_above_bo", f"{CITE['hogreve']}; {CITE['equal_q']}")))
    big, other = (q2, q3) if q2 >= q3 else (q3, q2)
    x_big, x_other = (x2, x3) if q2 >= q3 else (x3, x2)
    if not _close(q2, q3) and big > BO_CRITICAL_CHARGE and x_big <= x_other + TOL * max(x_big, x_other):
        hits.append(("certified-unstable", Rule("heavy_particle_large_charge", f"{CITE['hogreve']}; {CITE['heavy_q']}")))
    lieb = lieb_point_rule(q2, q3)
    if lieb is not None and point_in_hull(a, lieb.geometry):
        hits.append(("certified-unstable", Rule("lieb_point", CITE["lieb"])))
    on_axis = abs(a.a2 - a.a3) <= TOL
    if q2 > 2 and q3 > 2 and (on_axis or x_big <= x_other):
        hits.append(("certified-unstable", Rule("large_charges", f"{CITE['hogreve']}; {CITE['lieb']}; {CITE['large_q']}; {CITE['star']}")))
    return hits


def _symmetry_rules(t: NormalizedTriple) -> list[tuple[str, Rule]]:
    if _close(t.q2, 1.0) and _close(t.q3, 1.0) and abs(t.sys.x[1] - t.sys.x[2]) <= TOL * max(t.sys.x):
        return [("certified-stable", Rule("hill", CITE["hill"]))]
    return []


def _geometric_rules(t: NormalizedTriple, rules: RuleBase) -> list[tuple[str, Rule]]:
    a = t.alpha if t.alpha.in_left_half else t.alpha.swapped()
    hits = []
    for region in rules.unstable_regions(t.q2, t.q3):
        if point_in_hull(a, region.geometry):
            hits.append(("certified-unstable", Rule("convex_hull_instability", region.citation)))
    return hits


def evaluate_rules(
    sys: ParticleSystem,
    rules: RuleBase = DEFAULT_RULES,
    g_table: Optional[ExcessBindingTable] = None,
    method: str = "rules",
    solver_config=None,
    cache=None,
) -> Verdict:
    """Ordered rule evaluation; the first decisive rule wins, all hits are logged.

    ``method``: ``"rules"`` (deduction only), ``"variational"`` (solver only)
    or ``"auto"`` (deduction, then the solver when nothing is decisive).
    """
    if method not in ("rules", "variational", "auto"):
        raise ValueError(f"unknown method {method!r}")
    t = normalize(sys)
    inputs = {
        "system": t.sys.to_record(),
        "alpha": list(t.alpha.as_tuple()),
        "q2": t.q2,
        "q3": t.q3,
    }
    log: list[Rule] = []
    decided: Optional[tuple[str, tuple[Rule, ...]]] = None

    if method != "variational":
        stages = [_charge_rules(t), _symmetry_rules(t), _geometric_rules(t, rules)]
        for hits in stages:
            for status, rule in hits:
                log.append(rule)
                if decided is None:
                    decided = (status, (rule,))
        if g_table is not None and _close(t.q2, t.q3) and _close(g_table.charge, t.q2):
            band = axis_band_certify(t.alpha, g_table)
            inputs.update({k: v for k, v in band.inputs.items() if k != "alpha"})
            if band.status == "certified-stable":
                log.extend(band.provenance)
                if decided is None:
                    decided = ("certified-stable", band.provenance)
        statuses = {s for s, _ in (stages[0] + stages[1] + stages[2])}
        if "certified-stable" in statuses and "certified-unstable" in statuses:
            raise AssertionError(f"contradictory certified rules for {t.sys}: {log}")
        if decided is not None:
            return Verdict(decided[0], decided[1], inputs, log=tuple(log))

    if method == "rules":
        return Verdict("unknown", (), inputs, log=tuple(log))
    return _solver_verdict(t, inputs, log, solver_config, cache)


def _solver_verdict(t: NormalizedTriple, inputs, log, solver_config, cache) -> Verdict:
    from ..varsolve.solver import SolverConfig, certify_numeric, svm_optimize

    if t.alpha.is_vertex():
        inputs["diagnostic"] = "simplex vertex: left to deduction rules"
        return Verdict("unknown", (), inputs, log=tuple(log))
    # solve in the sum-normalized frame so energies match the triangle
    frame = ParticleSystem(t.alpha.as_tuple(), (1.0, -t.q2, -t.q3))
    try:
        thr = lowest_threshold(frame).energy
    except DegenerateLimit:
        inputs["diagnostic"] = "degenerate threshold"
        return Verdict("unknown", (), inputs, log=tuple(log))
    cfg = solver_config or SolverConfig()
    res = cache.get_or_solve(frame, cfg) if cache is not None else svm_optimize(frame, cfg)
    rec = res.to_record()
    # energies scale as q^4 / x: report them in the units of the input system
    unit = t.sys.q[0] ** 4 / sum(t.sys.x)
    energy, thr_user = res.energy * unit, thr * unit
    if certify_numeric(res.energy, thr):
        rule = Rule("variational", f"{CITE['variational']}: {energy:.6g} < {thr_user:.6g} ({res.basis_size} Gaussians)")
        return Verdict("numerically-stable", (rule,), inputs, energy, thr_user, tuple(log) + (rule,), rec)
    return Verdict("unknown", (), inputs, energy, thr_user, tuple(log), rec)


def pz_report(rules: RuleBase = DEFAULT_RULES) -> dict:
    rho = line_boundary(pz_family(), rules.unit_hull.geometry)
    return {
        "family": "p z+ z-",
        "critical_ratio": rho,
        "certified": f"unstable for m_p/m_z >= {rho:.4f}",
        "quoted_ratio": QUOTED_PZ_RATIO,
        "quoted_status": "unverified: not reproduced by the hull of vertex 3 and the two anchor points",
    }
