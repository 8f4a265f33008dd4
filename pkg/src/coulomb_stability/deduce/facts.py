from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from ..geometry import Polygon, as_xy
from ..systems import ChartError, SimplexPoint

STATUSES = ("certified-stable", "certified-unstable", "numerically-stable", "unknown")
FACT_STATUSES = ("unstable", "stable", "ratio-level")


@dataclass(frozen=True)
class Rule:
    rule: str
    citation: str

    def to_record(self) -> dict:
        return {"rule": self.rule, "citation": self.citation}


@dataclass(frozen=True)
class Verdict:
    status: str
    provenance: tuple[Rule, ...] = ()
    inputs: Optional[dict] = None
    energy: Optional[float] = None
    threshold: Optional[float] = None
    # every rule that applied, decisive or not
    log: tuple[Rule, ...] = field(default=(), compare=False)
    result: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status.startswith("certified") and not self.provenance:
            raise ValueError("certified verdicts need at least one cited rule")
        if self.status == "numerically-stable" and self.result is None:
            raise ValueError("numerically-stable verdicts carry the variational result")
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def certified(self) -> bool:
        return self.status.startswith("certified")

    def to_record(self) -> dict:
        rec = {
            "status": self.status,
            "provenance": [r.to_record() for r in self.provenance],
            "inputs": self.inputs,
        }
        if self.energy is not None:
            rec["energy"] = self.energy
        if self.threshold is not None:
            rec["threshold"] = self.threshold
        if self.result is not None:
            rec["result"] = self.result
        return rec

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_record(), **kw)


Geometry = Union[SimplexPoint, Polygon, tuple]


@dataclass(frozen=True)
class Fact:
    """A region (point, segment or convex polygon) with a uniform stability property.

    ``chart`` is ``"simplex"`` (at fixed charges) or ``"z"`` (inverse charges
    at fixed masses).  A ratio-level fact states E(123)/E(12) <= 1 + epsilon
    throughout its region.
    """

    geometry: Polygon
    status: str
    citation: str
    epsilon: float = 0.0
    charges: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.status not in FACT_STATUSES:
            raise ValueError(f"unknown fact status {self.status!r}")
        if self.status == "ratio-level" and self.epsilon <= 0:
            raise ValueError("ratio-level facts need epsilon > 0")
        if not isinstance(self.geometry, Polygon):
            raise TypeError("fact geometry must be a Polygon (use point_fact for single points)")

    @property
    def chart(self) -> str:
        return self.geometry.chart

    @property
    def in_left_half(self) -> bool:
        if self.chart != "simplex":
            raise ChartError("half-triangle membership is defined in the simplex chart")
        return all(v >= -1e-12 for v in (1 - 2 * u2 - u1 for u1, u2 in self.geometry.vertices))


def point_fact(p, status: str, citation: str, chart: str = "simplex", epsilon: float = 0.0, charges=(1.0, 1.0)) -> Fact:
    if isinstance(p, SimplexPoint) and chart != "simplex":
        raise ChartError("simplex point in a non-simplex chart")
    return Fact(Polygon((as_xy(p),), chart), status, citation, epsilon, tuple(charges))
