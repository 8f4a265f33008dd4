import math

import numpy as np
import pytest

from coulomb_stability.systems import (
    PARTICLE_MASSES,
    VERTEX3,
    DegenerateSimplex,
    InvalidSystem,
    ParticleSystem,
    SimplexPoint,
    TriviallyUnbound,
    canonicalize,
    format_system,
    from_simplex,
    is_one_plus_three,
    parse_system,
    to_simplex,
)


def test_parse_named_particles():
    s = parse_system("p:1, mu:-1, e:-1")
    assert s.masses[0] == pytest.approx(PARTICLE_MASSES["p"])
    assert s.x[2] == 1.0
    assert s.labels == ("p", "mu", "e")


def test_parse_infinite_mass():
    s = parse_system("inf:1, e:-1, e:-1")
    assert s.x == (0.0, 1.0, 1.0)
    assert math.isinf(s.masses[0])


def test_parse_rejects_garbage():
    with pytest.raises(InvalidSystem):
        parse_system("p-1, e:1")
    with pytest.raises(InvalidSystem):
        parse_system("quark:1, e:-1, e:-1")


def test_format_roundtrip():
    s = parse_system("inf:1, 2.5:-1, 1:-1")
    t = parse_system(format_system(s))
    assert (t.x, t.q) == (s.x, s.q)


def test_all_infinite_masses_rejected():
    with pytest.raises(DegenerateSimplex):
        ParticleSystem((0.0, 0.0, 0.0), (1, -1, -1))


def test_wrong_particle_count():
    with pytest.raises(InvalidSystem):
        ParticleSystem((1.0, 1.0), (1, -1))


def test_like_charges_are_trivially_unbound():
    with pytest.raises(TriviallyUnbound):
        canonicalize(ParticleSystem((1.0, 1.0, 1.0), (1, 1, 1)))


def test_canonical_three_body_conjugates_majority_positive():
    # e+ e+ e- is Ps- after conjugation: the lone negative leads
    s = canonicalize(parse_system("e:1, e:1, e:-1"))
    assert s.q == (1.0, -1.0, -1.0)
    assert s.conjugated
    assert s.permutation[0] == 2


def test_canonical_heavier_second():
    s = canonicalize(parse_system("p:1, e:-1, mu:-1"))
    assert s.labels == ("p", "mu", "e")
    assert to_simplex(s).in_left_half


def test_canonical_ties_keep_order_and_idempotent():
    s = ParticleSystem((1.0, 2.0, 2.0), (1, -1, -2), ("a", "b", "c"))
    c = canonicalize(s)
    assert c.labels == ("a", "b", "c")
    assert canonicalize(c) == c


def test_canonical_four_body():
    s = canonicalize(parse_system("e:-1, p:1, e:1, p:-1"))
    assert s.q == (1.0, 1.0, -1.0, -1.0)
    assert s.x[0] <= s.x[1] and s.x[2] <= s.x[3]
    t = canonicalize(parse_system("e:-1, e:-1, e:-1, inf:1"))
    assert is_one_plus_three(t) and t.x[0] == 0.0


def test_simplex_validation():
    with pytest.raises(ValueError):
        SimplexPoint(0.5, 0.6, 0.1)
    with pytest.raises(ValueError):
        SimplexPoint(-0.1, 0.6, 0.5)
    assert VERTEX3.is_vertex()
    assert SimplexPoint(0.2, 0.3, 0.5).swapped() == SimplexPoint(0.2, 0.5, 0.3)


def test_from_simplex_roundtrip():
    a = SimplexPoint(0.2, 0.3, 0.5)
    assert to_simplex(from_simplex(a)) == a


def test_scaling_invariance_1000_systems():
    rng = np.random.default_rng(12345)
    for _ in range(1000):
        m = 10 ** rng.uniform(-1, 4, size=3)
        q = rng.uniform(0.2, 3.0, size=3) * np.array([1, -1, -1])
        s = ParticleSystem.from_masses(m, q)
        k, c = 10 ** rng.uniform(-3, 3), 10 ** rng.uniform(-2, 2)
        a = to_simplex(canonicalize(s))
        b = to_simplex(canonicalize(s.scaled(k, c)))
        assert np.allclose(a.as_tuple(), b.as_tuple(), atol=1e-12)


def test_record_roundtrip():
    s = parse_system("p:1, d:1, mu:-1")
    assert ParticleSystem.from_record(s.to_record()) == s
