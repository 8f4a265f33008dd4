import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_stability.geometry import Line, Polygon, convex_hull, line_intersect_edge, point_in_hull, segment
from coulomb_stability.systems import ChartError, SimplexPoint


def _halfplane_inside(p, hull_pts, tol=1e-9):
    """Brute-force oracle: p is inside iff no line through two hull points
    separates it from all input points."""
    pts = np.asarray(hull_pts)
    n = len(pts)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = pts[i], pts[j]
            d = b - a
            side = d[0] * (pts[:, 1] - a[1]) - d[1] * (pts[:, 0] - a[0])
            sp = d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0])
            if np.all(side >= -tol) and sp < -tol:
                return False
            if np.all(side <= tol) and sp > tol:
                return False
    return True


def test_hull_oracle_1000_polygons():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        k = rng.integers(3, 9)
        pts = rng.uniform(0, 1, size=(k, 2))
        hull = convex_hull([tuple(p) for p in pts], chart="z")
        probe = rng.uniform(-0.1, 1.1, size=2)
        # skip probes numerically on the boundary
        margins = []
        for a, b in hull.edges():
            d = np.subtract(b, a)
            margins.append(abs(d[0] * (probe[1] - a[1]) - d[1] * (probe[0] - a[0])) / np.hypot(*d))
        if min(margins) < 1e-7:
            continue
        assert point_in_hull(tuple(probe), hull) == _halfplane_inside(probe, pts)
        # every input point is inside its hull
        assert all(point_in_hull(tuple(p), hull) for p in pts)


def test_hull_is_counter_clockwise_and_drops_interior():
    h = convex_hull([(0, 0), (1, 0), (0, 1), (0.2, 0.2), (0.5, 0)], chart="z")
    assert set(h.vertices) == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
    vs = np.array(h.vertices)
    area = 0.5 * np.sum(vs[:, 0] * np.roll(vs[:, 1], -1) - np.roll(vs[:, 0], -1) * vs[:, 1])
    assert area > 0


def test_degenerate_hulls():
    assert len(convex_hull([(0.1, 0.1)])) == 1
    seg = convex_hull([(0, 0), (0.5, 0.5), (1, 1)], chart="z")
    assert set(seg.vertices) == {(0.0, 0.0), (1.0, 1.0)}
    assert point_in_hull((0.25, 0.25), seg)
    assert not point_in_hull((0.25, 0.3), seg)


def test_boundary_inclusive():
    tri = convex_hull([SimplexPoint(0, 0, 1), SimplexPoint(0.5, 0, 0.5), SimplexPoint(0, 0.5, 0.5)])
    assert point_in_hull(SimplexPoint(0.25, 0.0, 0.75), tri)
    assert point_in_hull(SimplexPoint(0.25, 0.25, 0.5), tri)
    assert not point_in_hull(SimplexPoint(0.3, 0.3, 0.4), tri)


def test_mixed_charts_raise():
    poly = Polygon(((0, 0), (1, 0), (0, 1)), "z")
    with pytest.raises(ChartError):
        point_in_hull(SimplexPoint(0.2, 0.2, 0.6), poly)
    with pytest.raises(ChartError):
        point_in_hull((0.1, 0.1), poly, chart="simplex")
    with pytest.raises(ChartError):
        line_intersect_edge(Line(1, 0, 0.5), poly)
    with pytest.raises(ChartError):
        Polygon(((0, 0),), "mass")


def test_segment_and_interpolate():
    s = segment(SimplexPoint(0, 0, 1), SimplexPoint(0.4, 0.2, 0.4))
    assert s.interpolate(0.5) == pytest.approx((0.2, 0.1))
    with pytest.raises(ValueError):
        s.interpolate(1.5)


def test_line_intersections_square():
    sq = Polygon(((0, 0), (1, 0), (1, 1), (0, 1)), "z")
    pts = line_intersect_edge(Line(1.0, 1.0, 1.0, "z"), sq)  # u + v = 1 hits two corners
    assert sorted(pts) == [(0.0, 1.0), (1.0, 0.0)]
    pts = line_intersect_edge(Line(1.0, 0.0, 0.5, "z"), sq)
    assert sorted(pts) == [(0.5, 0.0), (0.5, 1.0)]
    assert line_intersect_edge(Line(1.0, 0.0, 2.0, "z"), sq) == []


def test_line_through():
    ln = Line.through((0, 0), (1, 2), "z")
    assert ln.value((2, 4)) == pytest.approx(0)
    with pytest.raises(ValueError):
        Line.through((1, 1), (1, 1))


def _boundary_distance(p, hull):
    if len(hull.vertices) == 1:
        return float(np.hypot(*np.subtract(p, hull.vertices[0])))
    best = np.inf
    for a, b in hull.edges():
        a, b = np.asarray(a), np.asarray(b)
        t = np.clip(np.dot(np.subtract(p, a), b - a) / max(np.dot(b - a, b - a), 1e-300), 0, 1)
        best = min(best, float(np.hypot(*(a + t * (b - a) - p))))
    return best


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=12), st.floats(0, 1))
def test_convex_combinations_inside(points, t):
    hull = convex_hull(points, chart="z")
    assert set(hull.vertices) <= {(float(u), float(v)) for u, v in points}
    a, b = points[0], points[-1]
    p = (t * a[0] + (1 - t) * b[0], t * a[1] + (1 - t) * b[1])
    # exact membership, or a rounding-level miss right on the boundary
    assert point_in_hull(p, hull) or _boundary_distance(p, hull) < 1e-9
