import numpy as np
import pytest

from coulomb_stability.deduce.facts import Fact, Rule, Verdict, point_fact
from coulomb_stability.deduce.rules import (
    DEFAULT_RULES,
    RuleBase,
    armour_schrader_point,
    axis_band_certify,
    evaluate_rules,
    glaser_point,
    hull_unstable,
    lieb_point_rule,
    line_boundary,
    pz_family,
    pz_report,
    ratio_hull,
    star_extend,
    z_sector,
)
from coulomb_stability.geometry import convex_hull, point_in_hull
from coulomb_stability.systems import VERTEX2, VERTEX3, ChartError, ParticleSystem, SimplexPoint, canonicalize, parse_system, to_simplex
from coulomb_stability.thresholds import lowest_threshold
from coulomb_stability.varsolve.excess import ExcessBindingTable
from coulomb_stability.varsolve.solver import SolverConfig, certify_numeric, svm_optimize

HULL_SYSTEMS = ["p:1, e:1, e:-1", "p:1, mu:1, mu:-1", "p:1, mu:-1, e:-1", "p:1, p:-1, e:-1"]
HEAVY_CHARGE_SYSTEMS = [f"alpha:2, {n}:1, {l}:-1" for l in ("e", "mu") for n in ("p", "d", "t")]


@pytest.mark.parametrize("text", HULL_SYSTEMS)
def test_hull_members_unstable(text):
    v = evaluate_rules(parse_system(text))
    assert v.status == "certified-unstable"
    assert v.provenance[0].rule == "convex_hull_instability"
    assert "Glaser" in v.provenance[0].citation and "Armour-Schrader" in v.provenance[0].citation


@pytest.mark.parametrize("text", HEAVY_CHARGE_SYSTEMS)
def test_heavy_particle_with_large_charge_unstable(text):
    v = evaluate_rules(parse_system(text))
    assert v.status == "certified-unstable"
    assert v.provenance[0].rule == "heavy_particle_large_charge"
    # the alpha carries charge 2 = 2 q1 after normalizing to the lone light particle
    assert max(v.inputs["q2"], v.inputs["q3"]) == pytest.approx(2.0)


def test_hill():
    for text in ("inf:1, e:-1, e:-1", "e:1, e:-1, e:-1", "e:-1, p:1, p:1"):
        v = evaluate_rules(parse_system(text))
        assert v.status == "certified-stable"
        assert v.provenance[0].rule == "hill"


def test_subunit_charges_stable_everywhere():
    rng = np.random.default_rng(1)
    for _ in range(200):
        m = 10 ** rng.uniform(-2, 4, size=3)
        v = evaluate_rules(ParticleSystem.from_masses(m, (1.0, -0.9, -0.9)))
        assert v.status == "certified-stable" and v.provenance[0].citation


def test_equal_charges_above_critical_unstable():
    v = evaluate_rules(ParticleSystem((0.3, 0.2, 0.5), (1, -1.3, -1.3)))
    assert v.status == "certified-unstable"


def test_lieb_point():
    v = evaluate_rules(ParticleSystem((0.0, 1.0, 1.0), (1, -1.5, -3.0)))
    assert v.status == "certified-unstable"
    assert any(r.rule == "lieb_point" for r in v.log)
    assert lieb_point_rule(1.5, 3.0) is not None
    assert lieb_point_rule(1.5, 2.9) is None
    with pytest.raises(ValueError):
        lieb_point_rule(-1, 2)


def test_large_charges():
    v = evaluate_rules(ParticleSystem((0.5, 0.2, 0.3), (1, -2.5, -2.2)))
    assert v.status == "certified-unstable"
    assert any(r.rule == "large_charges" for r in v.log)


def test_unknown_stays_unknown():
    v = evaluate_rules(parse_system("p:1, d:1, mu:-1"))
    assert v.status == "unknown" and v.provenance == ()


def test_axis_band_pdmu():
    alpha = to_simplex(canonicalize(parse_system("p:1, d:1, mu:-1")))
    assert alpha.a1 == pytest.approx(0.8555, abs=1e-4)
    need = (1 + alpha.a1) / (2 * (alpha.a1 + alpha.a2)) - 1
    assert need == pytest.approx(0.0266, abs=1e-4)
    good = ExcessBindingTable((0.85, 0.86), (0.1, 0.11))
    v = axis_band_certify(alpha, good)
    assert v.status == "certified-stable" and [r.rule for r in v.provenance] == ["hill", "axis_band"]
    poor = ExcessBindingTable((0.85, 0.86), (0.02, 0.03))
    assert axis_band_certify(alpha, poor).status == "unknown"
    outside = ExcessBindingTable((0.1, 0.2), (0.1, 0.1))
    out = axis_band_certify(alpha, outside)
    assert out.status == "unknown" and "diagnostic" in out.inputs
    v = evaluate_rules(parse_system("p:1, d:1, mu:-1"), g_table=good)
    assert v.status == "certified-stable"


def test_axis_band_on_axis_is_hill():
    v = axis_band_certify(SimplexPoint(0.4, 0.3, 0.3), ExcessBindingTable((0.9,), (0.0,)))
    assert v.status == "certified-stable"


def test_anchor_points():
    y = glaser_point()
    assert y.a1 == 0 and y.a2 == pytest.approx(0.3891, abs=1e-4)
    x = armour_schrader_point()
    assert x.a2 == 0 and x.a1 == pytest.approx(0.6016, abs=1e-4)


def test_pz_boundary_against_direct_intersection():
    # edge XY: X + t (Y - X) with a1 = a3 solved directly
    X, Y = np.array(armour_schrader_point().as_tuple()), np.array(glaser_point().as_tuple())
    d = Y - X
    t = (X[2] - X[0]) / (d[0] - d[2])
    a = X + t * d
    rho_direct = (1 - a[1]) / (2 * a[1])
    rho = line_boundary(pz_family(), DEFAULT_RULES.unit_hull.geometry)
    assert rho == pytest.approx(rho_direct, rel=1e-12)
    assert t == pytest.approx(0.2496, abs=1e-4)
    assert abs(rho - 4.65) <= 0.01
    rep = pz_report()
    assert rep["quoted_ratio"] == 2.2 and "unverified" in rep["quoted_status"]


def test_pz_family_parametrisation():
    fam = pz_family()
    for rho in (0.5, 1.0, 7.0):
        a = fam.alpha(rho)
        assert fam.param(a) == pytest.approx(rho)
        assert fam.line.value(a) == pytest.approx(0, abs=1e-14)
        sys = canonicalize(ParticleSystem.from_masses((1.0, rho, 1.0), (-1, 1, 1)))
        assert to_simplex(sys).as_tuple() == pytest.approx(fam.alpha(rho).swapped().as_tuple() if not fam.alpha(rho).in_left_half else fam.alpha(rho).as_tuple())


def test_star_extend():
    f = point_fact(glaser_point(), "unstable", "anchor")
    seg = star_extend(f)
    assert point_in_hull(SimplexPoint(0.0, 0.2, 0.8), seg.geometry)
    with pytest.raises(ValueError):
        star_extend(f, VERTEX2)  # left-half fact, right-half vertex
    with pytest.raises(ValueError):
        star_extend(point_fact(glaser_point(), "stable", "x"))
    with pytest.raises(ChartError):
        star_extend(point_fact((1.0, 1.0), "unstable", "x", chart="z"))


def test_hull_unstable_preconditions():
    a = point_fact(SimplexPoint(0.2, 0.1, 0.7), "unstable", "a")
    b = point_fact(SimplexPoint(0.2, 0.7, 0.1), "unstable", "b")
    with pytest.raises(ValueError):
        hull_unstable([a, b])  # straddles the bisector
    z = point_fact((0.5, 0.5), "unstable", "z", chart="z")
    with pytest.raises(ChartError):
        hull_unstable([a, z])
    with pytest.raises(ValueError):
        hull_unstable([a, point_fact(SimplexPoint(0.1, 0.1, 0.8), "unstable", "c", charges=(1.2, 1.2))])
    with pytest.raises(ValueError):
        hull_unstable([point_fact(SimplexPoint(0.1, 0.1, 0.8), "stable", "s")])
    h = hull_unstable([a, point_fact(VERTEX3, "unstable", "v")])
    assert point_in_hull(SimplexPoint(0.1, 0.05, 0.85), h.geometry)


def test_hull_in_z_chart_needs_sector():
    # masses (inf, 1, 1): sectors split by z2 = z3
    f1 = point_fact((0.5, 0.4), "unstable", "u", chart="z")
    f2 = point_fact((0.4, 0.3), "unstable", "u", chart="z")
    f3 = point_fact((0.3, 0.5), "unstable", "u", chart="z")
    with pytest.raises(ValueError):
        hull_unstable([f1, f2])  # masses missing
    hull_unstable([f1, f2], chart="z", masses=(float("inf"), 1.0, 1.0))
    with pytest.raises(ValueError):
        hull_unstable([f1, f3], chart="z", masses=(float("inf"), 1.0, 1.0))
    assert z_sector((1.0, 1.0), (float("inf"), 1.0, 1.0)) == 0
    assert z_sector((0.5, 1.0), (float("inf"), 1.0, 1.0)) == 1  # q2 larger: (12) lower


def test_ratio_hull():
    pts = [SimplexPoint(0.5, 0.1, 0.4), SimplexPoint(0.3, 0.2, 0.5), SimplexPoint(0.6, 0.2, 0.2)]
    facts = [Fact(convex_hull([p]), "ratio-level", "level set", epsilon=0.01) for p in pts]
    h = ratio_hull(facts, 0.01)
    assert h.status == "ratio-level" and len(h.geometry) == 3
    with pytest.raises(ValueError):
        ratio_hull(facts, 0.02)
    with pytest.raises(ValueError):
        Fact(convex_hull([pts[0]]), "ratio-level", "x", epsilon=0.0)
    # epsilon = 0 reduces to the instability hull
    u = [point_fact(p, "unstable", "u") for p in pts[:2]]
    assert ratio_hull(u, 0.0).status == "unstable"


def test_verdict_invariance_under_scaling_and_relabeling():
    rng = np.random.default_rng(8)
    for _ in range(300):
        m = 10 ** rng.uniform(-1, 4, size=3)
        q = np.array([1.0, -1.0, -1.0]) * np.where(rng.uniform(size=3) < 0.5, 1.0, rng.uniform(0.5, 2.5, size=3))
        s = ParticleSystem.from_masses(m, q)
        base = evaluate_rules(s)
        k, c = 10 ** rng.uniform(-3, 3), 10 ** rng.uniform(-1, 1)
        perm = rng.permutation(3)
        relabeled = ParticleSystem(tuple(s.x[i] for i in perm), tuple(-s.q[i] for i in perm))
        for other in (s.scaled(k, c), relabeled):
            v = evaluate_rules(other)
            assert v.status == base.status
            assert [r.rule for r in v.provenance] == [r.rule for r in base.provenance]


def test_method_validation():
    with pytest.raises(ValueError):
        evaluate_rules(parse_system("e:1, e:-1, e:-1"), method="guess")
    with pytest.raises(ValueError):
        evaluate_rules(parse_system("e:1, e:1, e:-1, e:-1"))


def test_variational_method_on_h_minus():
    v = evaluate_rules(parse_system("inf:1, e:-1, e:-1"), method="variational", solver_config=SolverConfig(max_basis=60))
    assert v.status == "numerically-stable"
    assert v.energy < v.threshold == -0.5
    assert v.result["basis_size"] == 60


def test_auto_falls_back_to_solver():
    v = evaluate_rules(parse_system("p:1, d:1, mu:-1"), method="auto", solver_config=SolverConfig(max_basis=60))
    assert v.status == "numerically-stable"
    assert v.provenance[0].rule == "variational"


def test_soundness_sample():
    """Certified-unstable systems never look bound to the solver."""
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 8:
        a = rng.dirichlet([1, 1, 1])
        s = ParticleSystem(tuple(a), (1, -1, -1))
        v = evaluate_rules(s)
        if v.status != "certified-unstable":
            continue
        c = canonicalize(s)
        r = svm_optimize(c, SolverConfig(max_basis=60, seed=checked))
        assert not certify_numeric(r.energy, lowest_threshold(c).energy)
        checked += 1


def test_verdict_invariants():
    with pytest.raises(ValueError):
        Verdict("certified-stable", ())
    with pytest.raises(ValueError):
        Verdict("numerically-stable", (Rule("variational", "x"),))
    with pytest.raises(ValueError):
        Verdict("maybe")
    v = Verdict("certified-stable", (Rule("hill", "Hill"),))
    assert v.certified and '"hill"' in v.to_json()


def test_rule_base_extra_facts():
    extra = hull_unstable([point_fact(SimplexPoint(0.3, 0.1, 0.6), "unstable", "user", charges=(1.1, 1.1)),
                           point_fact(VERTEX3, "unstable", "v", charges=(1.1, 1.1))])
    rb = RuleBase((extra,))
    s = ParticleSystem((0.15, 0.05, 0.8), (1, -1.1, -1.1))
    assert evaluate_rules(s).status == "unknown"
    assert evaluate_rules(s, rb).status == "certified-unstable"


def test_solver_energies_in_input_units():
    cfg = SolverConfig(max_basis=30)
    base = evaluate_rules(ParticleSystem((0.0, 1.0, 1.0), (1, -1, -1)), method="variational", solver_config=cfg)
    heavy = evaluate_rules(ParticleSystem((0.0, 0.5, 0.5), (2, -2, -2)), method="variational", solver_config=cfg)
    # masses x2 and charges x2 scale energies by 2 * 2^4
    assert heavy.energy == pytest.approx(32 * base.energy, rel=1e-12)
    assert heavy.threshold == pytest.approx(-16.0)
