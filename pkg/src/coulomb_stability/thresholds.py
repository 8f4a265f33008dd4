"""Two-body Coulomb ground states and dissociation thresholds.

Units: hbar = |e| = 1, masses in whatever unit the inverse masses use.
"""

from __future__ import annotations

from dataclasses import dataclass

from .systems import TOL, InvalidSystem, ParticleSystem, SimplexPoint, canonicalize, is_one_plus_three


class DegenerateLimit(ArithmeticError):
    """Attractive pair of two infinitely heavy particles: energy is -infinity."""


class NoThreshold(ValueError):
    """No attractive pair at all: the system is trivially unbound."""


@dataclass(frozen=True)
class ChannelEnergy:
    partition: tuple[tuple[int, ...], ...]
    energy: float

    @property
    def label(self) -> str:
        return " + ".join("(" + "".join(str(i + 1) for i in part) + ")" for part in self.partition)


def pair_energy(x_i: float, x_j: float, q_i: float, q_j: float) -> float:
    """Ground-state energy ``-(q_i q_j)^2 / (2 (x_i + x_j))`` of an attractive pair, else 0."""
    qq = q_i * q_j
    if qq >= 0:
        return 0.0
    s = x_i + x_j
    if s <= 0:
        raise DegenerateLimit("two infinite masses bound by an attractive Coulomb pair")
    return -(qq * qq) / (2.0 * s)


def _pair(sys: ParticleSystem, i: int, j: int) -> float:
    return pair_energy(sys.x[i], sys.x[j], sys.q[i], sys.q[j])


def lowest_threshold(sys: ParticleSystem) -> ChannelEnergy:
    """Lowest dissociation channel of a canonical 3- or 4-body system.

    Three bodies: atom (1j) plus a free particle.  Four bodies with two
    charges of each sign: the cheapest pairing into two neutral-or-repulsive
    pairs.  Splits leaving oppositely charged fragments are never thresholds,
    because the fragments keep attracting each other.
    """
    if not any(sys.q[i] * sys.q[j] < 0 for i in range(sys.n) for j in range(i + 1, sys.n)):
        raise NoThreshold(f"no attractive pair in {sys.q}")
    if sys.n == 3:
        chans = [ChannelEnergy(((0, 1), (2,)), _pair(sys, 0, 1)), ChannelEnergy(((0, 2), (1,)), _pair(sys, 0, 2))]
        if sys.q[1] * sys.q[2] < 0:
            chans.append(ChannelEnergy(((1, 2), (0,)), _pair(sys, 1, 2)))
        return min(chans, key=lambda c: c.energy)
    if is_one_plus_three(sys):
        raise InvalidSystem("thresholds of 1+3 charge structures involve a three-body ion; use the charge-count bound")
    chans = []
    for a, b in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        chans.append(ChannelEnergy((a, b), _pair(sys, *a) + _pair(sys, *b)))
    return min(chans, key=lambda c: c.energy)


def threshold_energy(sys: ParticleSystem) -> float:
    return lowest_threshold(canonicalize(sys)).energy


@dataclass(frozen=True)
class DividingLine:
    """Locus ``q2^2 (1 - a2) = q3^2 (1 - a3)`` where channels (12) and (13) tie.

    It passes through the point ``a2 = a3 = 1`` outside the triangle.
    ``value(alpha) > 0`` means channel (12) is the lower one.
    """

    q2: float
    q3: float

    def value(self, alpha: SimplexPoint) -> float:
        return self.q2**2 * (1.0 - alpha.a2) - self.q3**2 * (1.0 - alpha.a3)

    def lowest_channel(self, alpha: SimplexPoint) -> str:
        v = self.value(alpha)
        if abs(v) <= TOL:
            return "tie"
        return "(12)" if v > 0 else "(13)"

    def coefficients(self) -> tuple[float, float, float]:
        """``(c1, c2, c3)`` with ``c . alpha = 0`` on the line (using a1+a2+a3 = 1)."""
        # q2^2 (a1 + a3) - q3^2 (a1 + a2) = 0
        q22, q33 = self.q2**2, self.q3**2
        return (q22 - q33, -q33, q22)


def dividing_line(q2: float, q3: float) -> DividingLine:
    if q2 <= 0 or q3 <= 0:
        raise ValueError("charge magnitudes must be positive")
    return DividingLine(q2, q3)
