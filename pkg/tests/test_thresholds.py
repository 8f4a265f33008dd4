import pytest

from coulomb_stability.systems import PARTICLE_MASSES, InvalidSystem, ParticleSystem, SimplexPoint, canonicalize, parse_system
from coulomb_stability.thresholds import (
    DegenerateLimit,
    NoThreshold,
    dividing_line,
    lowest_threshold,
    pair_energy,
    threshold_energy,
)


def test_hydrogen_and_positronium_exact():
    assert pair_energy(0.0, 1.0, 1, -1) == -0.5
    assert pair_energy(1.0, 1.0, 1, -1) == -0.25


def test_proton_muon_from_reduced_mass():
    mp, mmu = PARTICLE_MASSES["p"], PARTICLE_MASSES["mu"]
    reduced = mp * mmu / (mp + mmu)
    e = pair_energy(1 / mp, 1 / mmu, 1, -1)
    assert e == pytest.approx(-reduced / 2, rel=1e-14)
    assert abs(e - -92.92) <= 0.01


def test_charge_scaling():
    assert pair_energy(0.0, 1.0, 2, -1) == -2.0


def test_repulsive_pair_contributes_zero():
    assert pair_energy(1.0, 1.0, -1, -1) == 0.0
    assert pair_energy(0.0, 0.0, 1, 1) == 0.0


def test_degenerate_limit():
    with pytest.raises(DegenerateLimit):
        pair_energy(0.0, 0.0, 1, -1)


def test_three_body_lowest_channel():
    ch = lowest_threshold(canonicalize(parse_system("inf:1, e:-1, e:-1")))
    assert ch.energy == -0.5
    ch = lowest_threshold(canonicalize(parse_system("e:1, p:-1, e:-1")))
    assert ch.label == "(12) + (3)"
    assert ch.energy == pytest.approx(pair_energy(1.0, 1 / PARTICLE_MASSES["p"], 1, -1))


def test_four_body_pairings():
    ps2 = canonicalize(parse_system("e:1, e:1, e:-1, e:-1"))
    assert threshold_energy(ps2) == -0.5
    h2 = parse_system("p:1, p:1, e:-1, e:-1")
    assert threshold_energy(h2) == pytest.approx(2 * pair_energy(1 / PARTICLE_MASSES["p"], 1.0, 1, -1))


def test_one_plus_three_refused():
    with pytest.raises(InvalidSystem):
        lowest_threshold(canonicalize(parse_system("inf:1, e:-1, e:-1, e:-1")))


def test_no_attractive_pair():
    with pytest.raises(NoThreshold):
        lowest_threshold(ParticleSystem((1, 1, 1), (1, 1, 1)))


def test_dividing_line_matches_channel_energies():
    dl = dividing_line(1.0, 1.3)
    for a in [SimplexPoint(0.1, 0.2, 0.7), SimplexPoint(0.3, 0.6, 0.1), SimplexPoint(0.5, 0.25, 0.25)]:
        e12 = pair_energy(a.a1, a.a2, 1, -1.0)
        e13 = pair_energy(a.a1, a.a3, 1, -1.3)
        assert dl.lowest_channel(a) == ("(12)" if e12 < e13 else "(13)")
        # the linear form vanishes exactly where the channels tie
        c = dl.coefficients()
        assert sum(ci * ai for ci, ai in zip(c, a.as_tuple())) == pytest.approx(dl.value(a))
    assert dividing_line(1, 1).lowest_channel(SimplexPoint(0.2, 0.4, 0.4)) == "tie"
    with pytest.raises(ValueError):
        dividing_line(-1, 1)
