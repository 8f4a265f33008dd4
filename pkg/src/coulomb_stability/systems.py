"""Few-body Coulomb systems and their barycentric (inverse-mass simplex) coordinates.

Masses are in electron-mass units and a system is stored through its inverse
masses ``x_i = 1/m_i``; an infinitely heavy particle has ``x_i = 0``.
Charges are signed, in units of the elementary charge.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

TOL = 1e-12

# Masses in units of the electron mass.
PARTICLE_MASSES = {
    "e": 1.0,
    "mu": 206.7682830,
    "pi": 273.13204,
    "p": 1836.15267343,
    "d": 3670.48296788,
    "t": 5496.92153573,
    "alpha": 7294.29954142,
    "inf": math.inf,
}


class InvalidSystem(ValueError):
    """Raised for malformed or physically excluded particle systems."""


class TriviallyUnbound(InvalidSystem):
    """All charges share one sign: no bound state exists."""


class DegenerateSimplex(InvalidSystem):
    """Every inverse mass vanishes (all particles infinitely heavy)."""


class ChartError(ValueError):
    """Geometric objects from different coordinate charts were mixed."""


@dataclass(frozen=True)
class ParticleSystem:
    x: tuple[float, ...]
    q: tuple[float, ...]
    labels: Optional[tuple[str, ...]] = None
    # Position of each canonical particle in the original input, and whether
    # all charges were sign-flipped.  Bookkeeping only, not part of identity.
    permutation: Optional[tuple[int, ...]] = field(default=None, compare=False)
    conjugated: bool = field(default=False, compare=False)

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        q = tuple(float(v) for v in self.q)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "q", q)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(x) not in (3, 4) or len(q) != len(x):
            raise InvalidSystem(f"need 3 or 4 particles with one charge each, got x={x}, q={q}")
        if any(v < 0 or not math.isfinite(v) for v in x):
            raise InvalidSystem(f"inverse masses must be finite and >= 0: {x}")
        if not any(v > 0 for v in x):
            raise DegenerateSimplex("at least one particle must have finite mass")
        if self.labels is not None and len(self.labels) != len(x):
            raise InvalidSystem("labels length does not match particle count")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(math.inf if v == 0 else 1.0 / v for v in self.x)

    @classmethod
    def from_masses(cls, masses: Sequence[float], charges: Sequence[float], labels=None) -> "ParticleSystem":
        x = []
        for m in masses:
            if m <= 0:
                raise InvalidSystem(f"masses must be positive, got {m}")
            x.append(0.0 if math.isinf(m) else 1.0 / m)
        return cls(tuple(x), tuple(charges), labels)

    def scaled(self, mass_factor: float = 1.0, charge_factor: float = 1.0) -> "ParticleSystem":
        """Multiply every mass by ``mass_factor`` and every charge by ``charge_factor``."""
        return ParticleSystem(
            tuple(v / mass_factor for v in self.x),
            tuple(v * charge_factor for v in self.q),
            self.labels,
        )

    def describe(self) -> str:
        names = self.labels or tuple(f"#{i + 1}" for i in range(self.n))
        parts = []
        for name, m, q in zip(names, self.masses, self.q):
            parts.append(f"{name}(m={'inf' if math.isinf(m) else f'{m:.6g}'}, q={q:+g})")
        return " ".join(parts)

    def to_record(self) -> dict:
        return {"x": list(self.x), "q": list(self.q), "labels": list(self.labels) if self.labels else None}

    @classmethod
    def from_record(cls, rec: dict) -> "ParticleSystem":
        return cls(tuple(rec["x"]), tuple(rec["q"]), tuple(rec["labels"]) if rec.get("labels") else None)


@dataclass(frozen=True)
class SimplexPoint:
    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        for v in (self.a1, self.a2, self.a3):
            if v < -TOL or v > 1 + TOL:
                raise ValueError(f"simplex coordinates must lie in [0, 1]: {self.as_tuple()}")
        if abs(self.a1 + self.a2 + self.a3 - 1.0) > TOL:
            raise ValueError(f"simplex coordinates must sum to 1: {self.as_tuple()}")

    @classmethod
    def normalized(cls, a1: float, a2: float, a3: float) -> "SimplexPoint":
        s = a1 + a2 + a3
        return cls(a1 / s, a2 / s, a3 / s)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def swapped(self) -> "SimplexPoint":
        """Mirror image across the bisector through vertex 1 (exchange particles 2 and 3)."""
        return SimplexPoint(self.a1, self.a3, self.a2)

    @property
    def chart_xy(self) -> tuple[float, float]:
        # two independent coordinates used by the geometry kit
        return (self.a1, self.a2)

    @property
    def in_left_half(self) -> bool:
        return self.a2 <= self.a3 + TOL

    def is_vertex(self) -> bool:
        return max(self.as_tuple()) >= 1.0 - TOL


VERTEX1 = SimplexPoint(1.0, 0.0, 0.0)
VERTEX2 = SimplexPoint(0.0, 1.0, 0.0)
VERTEX3 = SimplexPoint(0.0, 0.0, 1.0)


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def canonicalize(sys: ParticleSystem) -> ParticleSystem:
    """Return the system in canonical particle order.

    Three bodies: the particle whose charge sign is in the minority comes
    first and is made positive (charge conjugation if needed); the remaining
    two are ordered heavier first, ties keeping input order.  Four bodies:
    positives first then negatives, each group heavier first; a 1+3 charge
    split puts the lone charge first, made positive.
    """
    signs = [_sign(v) for v in sys.q]
    n_pos = signs.count(1)
    n_neg = signs.count(-1)
    if n_pos == 0 or n_neg == 0:
        raise TriviallyUnbound(f"no pair of opposite charges in {sys.q}: system is unbound")
    if n_pos + n_neg != sys.n:
        raise InvalidSystem(f"neutral particles are not supported: {sys.q}")

    conj = False
    if sys.n == 3:
        conj = n_pos == 2
        lead = signs.index(-1 if conj else 1)
        rest = [i for i in range(3) if i != lead]
        rest.sort(key=lambda i: sys.x[i])  # stable: ties keep input order
        order = [lead] + rest
    else:
        if n_pos == 2:
            pos = sorted((i for i in range(4) if signs[i] > 0), key=lambda i: sys.x[i])
            neg = sorted((i for i in range(4) if signs[i] < 0), key=lambda i: sys.x[i])
            order = pos + neg
        else:
            conj = n_pos == 3
            lead = signs.index(-1 if conj else 1)
            rest = sorted((i for i in range(4) if i != lead), key=lambda i: sys.x[i])
            order = [lead] + rest

    flip = -1.0 if conj else 1.0
    # compose with any permutation already recorded so idempotence keeps provenance
    prior = sys.permutation or tuple(range(sys.n))
    return ParticleSystem(
        tuple(sys.x[i] for i in order),
        tuple(flip * sys.q[i] for i in order),
        tuple(sys.labels[i] for i in order) if sys.labels else None,
        permutation=tuple(prior[i] for i in order),
        conjugated=sys.conjugated ^ conj,
    )


def is_one_plus_three(sys: ParticleSystem) -> bool:
    signs = [_sign(v) for v in sys.q]
    return sys.n == 4 and signs.count(1) in (1, 3)


def to_simplex(sys: ParticleSystem) -> SimplexPoint:
    if sys.n != 3:
        raise InvalidSystem("simplex coordinates are defined for three-body systems")
    s = sum(sys.x)
    if s <= 0:
        raise DegenerateSimplex("three infinite masses")
    a1, a2 = sys.x[0] / s, sys.x[1] / s
    return SimplexPoint(a1, a2, max(0.0, 1.0 - a1 - a2))


def from_simplex(alpha: SimplexPoint, charges: Sequence[float] = (1.0, -1.0, -1.0), labels=None) -> ParticleSystem:
    """Representative system with inverse masses summing to one."""
    return ParticleSystem(alpha.as_tuple(), tuple(charges), labels)


_LITERAL = re.compile(r"^\s*([^:\s]+)\s*:\s*([-+]?[0-9.eE+-]+)\s*$")


def parse_system(text: str) -> ParticleSystem:
    """Parse ``"m1:q1, m2:q2, m3:q3[, m4:q4]"``.

    A mass is a positive number, ``inf``, or one of the names in
    ``PARTICLE_MASSES`` (``p``, ``mu``, ``e``, ...).
    """
    masses, charges, labels = [], [], []
    for item in text.split(","):
        m = _LITERAL.match(item)
        if not m:
            raise InvalidSystem(f"cannot parse particle literal {item!r}; expected mass:charge")
        mass_txt, q_txt = m.groups()
        key = mass_txt.lower()
        if key in PARTICLE_MASSES:
            mass = PARTICLE_MASSES[key]
            labels.append(key)
        else:
            try:
                mass = float(mass_txt)
            except ValueError:
                raise InvalidSystem(f"unknown mass {mass_txt!r}") from None
            labels.append(mass_txt)
        masses.append(mass)
        charges.append(float(q_txt))
    return ParticleSystem.from_masses(masses, charges, tuple(labels))


def format_system(sys: ParticleSystem) -> str:
    return ", ".join(
        f"{'inf' if math.isinf(m) else repr(m)}:{q:g}" for m, q in zip(sys.masses, sys.q)
    )
