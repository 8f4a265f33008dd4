"""Relative excess binding on the symmetric axis a2 = a3."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from ..systems import ParticleSystem
from .solver import SolverConfig, svm_optimize


@dataclass(frozen=True)
class ExcessBindingTable:
    """``g(a1) = E123(a1, (1-a1)/2, (1-a1)/2) / E12(a1, (1-a1)/2) - 1`` on a grid.

    Solver energies are upper bounds, so the tabulated ``g`` are lower bounds
    on the true excess.  Between grid nodes the smaller neighbour is used.
    """

    alpha1: tuple[float, ...]
    g: tuple[float, ...]
    charge: float = 1.0
    basis_size: int = 0
    energies: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.alpha1) != len(self.g) or not self.alpha1:
            raise ValueError("grid and values must be non-empty and of equal length")
        if list(self.alpha1) != sorted(self.alpha1):
            raise ValueError("alpha1 grid must be increasing")

    def covers(self, a1: float) -> bool:
        return self.alpha1[0] - 1e-12 <= a1 <= self.alpha1[-1] + 1e-12

    def lookup(self, a1: float) -> Optional[float]:
        if not self.covers(a1):
            return None
        i = bisect.bisect_left(self.alpha1, a1 - 1e-12)
        if i < len(self.alpha1) and abs(self.alpha1[i] - a1) <= 1e-12:
            return self.g[i]
        return min(self.g[i - 1], self.g[i])

    def to_record(self) -> dict:
        return {
            "alpha1": list(self.alpha1),
            "g": list(self.g),
            "charge": self.charge,
            "basis_size": self.basis_size,
            "energies": list(self.energies),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ExcessBindingTable":
        return cls(tuple(rec["alpha1"]), tuple(rec["g"]), rec.get("charge", 1.0), rec.get("basis_size", 0), tuple(rec.get("energies", ())))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_record(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "ExcessBindingTable":
        with open(path) as fh:
            return cls.from_record(json.load(fh))


def axis_system(a1: float, charge: float = 1.0) -> ParticleSystem:
    a = (1.0 - a1) / 2.0
    return ParticleSystem((a1, a, a), (1.0, -charge, -charge))


def excess_binding_table(alpha1_grid: Sequence[float], charge: float = 1.0, config: SolverConfig = SolverConfig(), cache=None) -> ExcessBindingTable:
    """Solve the axis system at each node; ``charge`` is q2 = q3 with q1 = 1."""
    grid = sorted(float(a) for a in alpha1_grid)
    if any(not 0.0 < a < 1.0 for a in grid):
        raise ValueError("alpha1 grid must lie strictly inside (0, 1)")
    gs, es = [], []
    for k, a1 in enumerate(grid):
        sys = axis_system(a1, charge)
        cfg = replace(config, seed=config.seed + k)
        res = cache.get_or_solve(sys, cfg) if cache is not None else svm_optimize(sys, cfg)
        e12 = -(charge**2) / (2.0 * (a1 + (1.0 - a1) / 2.0))
        gs.append(res.energy / e12 - 1.0)
        es.append(res.energy)
    return ExcessBindingTable(tuple(grid), tuple(gs), charge, config.max_basis, tuple(es))
