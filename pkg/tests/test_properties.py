"""Structural properties of the three-body energy as a function of inverse masses.

In a fixed basis the Hamiltonian matrix is affine in the inverse masses, so
its lowest eigenvalue is concave in them and nondecreasing in each one
(the kinetic part is positive semidefinite).  These hold to rounding and
serve as exact oracles; an optimized-basis check covers the solver itself.
"""

import numpy as np
import pytest

from coulomb_stability.systems import ParticleSystem
from coulomb_stability.varsolve.gaussians import Basis
from coulomb_stability.varsolve.solver import SolverConfig, _spectrum, ground_state, svm_optimize

Q = (1.0, -1.0, -1.0)


def _grown_forms(x, seed, size=40):
    out = []
    svm_optimize(ParticleSystem(tuple(x), Q), SolverConfig(max_basis=size, seed=seed), basis_out=out)
    return out[0].forms


def _energy(x, forms):
    return ground_state(Basis.from_forms(ParticleSystem(tuple(x), Q), forms)).energy


def test_concavity_midpoint_fixed_basis_50_triples():
    rng = np.random.default_rng(2024)
    for k in range(50):
        xa, xb = rng.uniform(0.05, 2.0, 3), rng.uniform(0.05, 2.0, 3)
        mid = 0.5 * (xa + xb)
        forms = _grown_forms(mid, k, size=30)
        ea, eb, em = _energy(xa, forms), _energy(xb, forms), _energy(mid, forms)
        avg = 0.5 * (ea + eb)
        assert em >= avg - 1e-3 * abs(avg)
        assert em >= avg - 1e-9  # exact for a fixed basis


@pytest.mark.slow
def test_concavity_midpoint_optimized_bases():
    rng = np.random.default_rng(77)
    cfg = SolverConfig(max_basis=80)
    for _ in range(10):
        xa, xb = rng.uniform(0.05, 2.0, 3), rng.uniform(0.05, 2.0, 3)
        e = [svm_optimize(ParticleSystem(tuple(x), Q), cfg).energy for x in (xa, xb, 0.5 * (xa + xb))]
        avg = 0.5 * (e[0] + e[1])
        assert e[2] >= avg - 1e-3 * abs(avg)


def test_feynman_hellmann_ladders():
    rng = np.random.default_rng(5)
    for k in range(10):
        x1, x2 = rng.uniform(0.05, 1.5, 2)
        forms = _grown_forms((x1, x2, 1.0), k)
        ladder = [_energy((x1, x2, x3), forms) for x3 in np.linspace(0.2, 2.0, 6)]
        steps = np.diff(ladder)
        assert np.all(steps >= -1e-4 * np.abs(ladder[:-1]))
        assert np.all(steps >= -1e-12)
        # derivative: finite difference equals <psi| dH/dx3 |psi>
        b0 = Basis.from_forms(ParticleSystem((x1, x2, 1.0), Q), forms)
        b1 = Basis.from_forms(ParticleSystem((x1, x2, 2.0), Q), forms)
        psi = _spectrum(b0.H, b0.S, 1e-12).vectors[:, 0]
        dH = b1.H - b0.H
        h = 1e-4
        fd = (_energy((x1, x2, 1 + h), forms) - _energy((x1, x2, 1 - h), forms)) / (2 * h)
        assert fd == pytest.approx(psi @ dH @ psi, rel=1e-4)
        assert psi @ dH @ psi >= 0


def test_kinetic_part_is_affine_in_inverse_masses():
    forms = _grown_forms((0.3, 0.5, 0.7), 0, size=15)
    bs = [Basis.from_forms(ParticleSystem(x, Q), forms).H for x in [(0.3, 0.5, 0.7), (0.5, 0.1, 0.9), (0.4, 0.3, 0.8)]]
    assert np.allclose(0.5 * (bs[0] + bs[1]), bs[2], rtol=1e-12, atol=1e-12)
