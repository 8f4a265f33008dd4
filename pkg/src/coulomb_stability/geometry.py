"""Planar convex geometry on two coordinate charts.

``"simplex"`` points are stored by their two independent coordinates
``(alpha1, alpha2)``; ``"z"`` points are inverse charges ``(1/q2, 1/q3)``.
All predicates use an absolute tolerance of 1e-12 and treat the boundary as
inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .systems import TOL, ChartError, SimplexPoint

CHARTS = ("simplex", "z")

Point2 = tuple[float, float]


def as_xy(p: Union[SimplexPoint, Sequence[float]]) -> Point2:
    if isinstance(p, SimplexPoint):
        return p.chart_xy
    # a bare 3-tuple is read as simplex coordinates; its third entry is implied
    return (float(p[0]), float(p[1]))


@dataclass(frozen=True)
class Polygon:
    """Convex polygon (possibly a point or a segment), vertices counter-clockwise."""

    vertices: tuple[Point2, ...]
    chart: str = "simplex"

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("polygon needs at least one vertex")
        if self.chart not in CHARTS:
            raise ChartError(f"unknown chart {self.chart!r}")
        object.__setattr__(self, "vertices", tuple((float(u), float(v)) for u, v in self.vertices))

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        vs = self.vertices
        if len(vs) == 1:
            return []
        if len(vs) == 2:
            return [(vs[0], vs[1])]
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def simplex_vertices(self) -> list[SimplexPoint]:
        if self.chart != "simplex":
            raise ChartError("polygon is not in the simplex chart")
        return [SimplexPoint(u, v, max(0.0, 1.0 - u - v)) for u, v in self.vertices]

    def interpolate(self, lam: float, i: int = 0) -> Point2:
        """Point ``lam * v_i + (1 - lam) * v_{i+1}`` on edge ``i``."""
        if not 0.0 <= lam <= 1.0:
            raise ValueError("interpolation parameter must lie in [0, 1]")
        (a, b) = self.edges()[i] if len(self.vertices) > 1 else (self.vertices[0],) * 2
        return (lam * a[0] + (1 - lam) * b[0], lam * a[1] + (1 - lam) * b[1])


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable, chart: str = "simplex") -> Polygon:
    """Andrew's monotone chain; collinear points are dropped."""
    pts = sorted(set(as_xy(p) for p in points))
    if not pts:
        raise ValueError("hull of no points")
    if len(pts) <= 2:
        return Polygon(tuple(pts), chart)

    def half(seq):
        out: list[Point2] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= TOL * TOL:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        hull = [pts[0], pts[-1]]
    return Polygon(tuple(hull), chart)


def segment(p, q, chart: str = "simplex") -> Polygon:
    _check_chart(chart, p, q)
    a, b = as_xy(p), as_xy(q)
    if a == b:
        return Polygon((a,), chart)
    return Polygon((a, b), chart)


def _check_chart(chart: str, *objs) -> None:
    for o in objs:
        if isinstance(o, Polygon) and o.chart != chart:
            raise ChartError(f"mixed charts: {o.chart} vs {chart}")
        if isinstance(o, SimplexPoint) and chart != "simplex":
            raise ChartError(f"simplex point used in {chart} chart")


def _on_segment(p: Point2, a: Point2, b: Point2) -> bool:
    if abs(_cross(a, b, p)) > TOL * max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1])):
        return False
    return (
        min(a[0], b[0]) - TOL <= p[0] <= max(a[0], b[0]) + TOL
        and min(a[1], b[1]) - TOL <= p[1] <= max(a[1], b[1]) + TOL
    )


def point_in_hull(p, poly: Polygon, chart: Optional[str] = None) -> bool:
    """Boundary-inclusive membership via a triangle fan from the first vertex.

    Each fan triangle is tested with barycentric (cone) coordinates.
    """
    if chart is not None and chart != poly.chart:
        raise ChartError(f"point chart {chart} differs from polygon chart {poly.chart}")
    _check_chart(poly.chart, p)
    pt = as_xy(p)
    vs = poly.vertices
    if len(vs) == 1:
        return abs(pt[0] - vs[0][0]) <= TOL and abs(pt[1] - vs[0][1]) <= TOL
    if len(vs) == 2:
        return _on_segment(pt, vs[0], vs[1])
    o = vs[0]
    for i in range(1, len(vs) - 1):
        a, b = vs[i], vs[i + 1]
        e1 = (a[0] - o[0], a[1] - o[1])
        e2 = (b[0] - o[0], b[1] - o[1])
        d = (pt[0] - o[0], pt[1] - o[1])
        det = e1[0] * e2[1] - e1[1] * e2[0]
        s = (d[0] * e2[1] - d[1] * e2[0]) / det
        t = (e1[0] * d[1] - e1[1] * d[0]) / det
        if s >= -TOL and t >= -TOL and s + t <= 1 + TOL:
            return True
    return False


@dataclass(frozen=True)
class Line:
    """Implicit line ``a*u + b*v = c`` in a chart."""

    a: float
    b: float
    c: float
    chart: str = "simplex"

    @classmethod
    def through(cls, p, q, chart: str = "simplex") -> "Line":
        (u1, v1), (u2, v2) = as_xy(p), as_xy(q)
        a, b = v2 - v1, u1 - u2
        if a == 0 and b == 0:
            raise ValueError("line through coincident points")
        return cls(a, b, a * u1 + b * v1, chart)

    def value(self, p) -> float:
        u, v = as_xy(p)
        return self.a * u + self.b * v - self.c


def line_intersect_edge(line: Line, poly: Polygon) -> list[Point2]:
    """Intersection points of ``line`` with the boundary of ``poly`` (deduplicated)."""
    if line.chart != poly.chart:
        raise ChartError(f"mixed charts: {line.chart} vs {poly.chart}")
    out: list[Point2] = []
    if len(poly.vertices) == 1:
        if abs(line.value(poly.vertices[0])) <= TOL:
            out.append(poly.vertices[0])
        return out
    for a, b in poly.edges():
        fa, fb = line.value(a), line.value(b)
        if abs(fa) <= TOL and abs(fb) <= TOL:
            out.extend([a, b])  # edge lies on the line
        elif abs(fa) <= TOL:
            out.append(a)
        elif abs(fb) <= TOL:
            out.append(b)
        elif fa * fb < 0:
            t = fa / (fa - fb)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    uniq: list[Point2] = []
    for p in out:
        if not any(abs(p[0] - r[0]) <= 1e-10 and abs(p[1] - r[1]) <= 1e-10 for r in uniq):
            uniq.append(p)
    return uniq
