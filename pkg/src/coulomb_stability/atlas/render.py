"""Matplotlib figures for stability maps, written as SVG."""

from __future__ import annotations

import io
import math
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402

from ..geometry import Polygon  # noqa: E402

CLASS_STYLE = {
    "certified-stable": ("#1b7837", "o", "certified stable"),
    "numerically-stable": ("#7fbf7b", "D", "numerically stable"),
    "certified-unstable": ("#b2182b", "s", "certified unstable"),
    "unknown": ("#bdbdbd", "x", "unknown"),
}

# corners of the drawn triangle: vertex 1 on top, vertex 3 bottom left so
# the left half-triangle (a2 <= a3) sits on the left
_CORNERS = np.array([[0.5, math.sqrt(3) / 2], [1.0, 0.0], [0.0, 0.0]])


def ternary_xy(alpha) -> np.ndarray:
    """Cartesian position of barycentric coordinates (a1, a2, a3)."""
    return np.asarray(alpha, dtype=float) @ _CORNERS


def _style():
    matplotlib.rcParams.update(
        {
            "svg.hashsalt": "coulomb-stability",
            "svg.fonttype": "none",
            "font.size": 9,
            "axes.spines.top": False,
            "axes.spines.right": False,
        }
    )


def _legend(ax, **kw):
    handles = [
        Line2D([], [], color=c, marker=m, linestyle="none", label=lab) for c, m, lab in CLASS_STYLE.values()
    ]
    ax.legend(handles=handles, frameon=False, fontsize=8, **kw)


def _scatter(ax, xy: np.ndarray, statuses: list[str]):
    for status, (color, marker, _) in CLASS_STYLE.items():
        sel = np.array([s == status for s in statuses], dtype=bool)
        if sel.any():
            ax.plot(xy[sel, 0], xy[sel, 1], marker, color=color, ms=4, linestyle="none")


def _simplex_figure(smap, hull: Optional[Polygon]):
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    tri = np.vstack([_CORNERS, _CORNERS[:1]])
    ax.plot(tri[:, 0], tri[:, 1], color="black", lw=0.8)
    # symmetry axis a2 = a3 from vertex 1 to the midpoint of edge 23
    mid = ternary_xy([0.0, 0.5, 0.5])
    ax.plot([_CORNERS[0, 0], mid[0]], [_CORNERS[0, 1], mid[1]], color="black", lw=0.4, ls=":")
    for k, (dx, dy) in enumerate([(0.0, 0.03), (0.02, -0.05), (-0.02, -0.05)]):
        ax.annotate(str(k + 1), _CORNERS[k] + (dx, dy), ha="center", fontsize=10)
    if smap.cells:
        xy = ternary_xy([c.coords for c in smap.cells])
        _scatter(ax, xy, [c.verdict.status for c in smap.cells])
    if hull is not None and len(hull.vertices) > 2:
        for verts in (hull.simplex_vertices(), [v.swapped() for v in hull.simplex_vertices()]):
            pts = ternary_xy([v.as_tuple() for v in verts])
            pts = np.vstack([pts, pts[:1]])
            ax.plot(pts[:, 0], pts[:, 1], color="#b2182b", lw=0.8)
    ax.set_aspect("equal")
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(-0.1, 1.0)
    ax.axis("off")
    meta = smap.metadata
    if "q2" in meta:
        ax.set_title(f"charges (+1, -{meta['q2']:g}, -{meta['q3']:g}), h = {smap.h:g}")
    _legend(ax, loc="upper left")
    return fig


def _charge_figure(smap):
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    if smap.cells:
        z = np.array([[1.0 / c.coords[0], 1.0 / c.coords[1]] for c in smap.cells])
        _scatter(ax, z, [c.verdict.status for c in smap.cells])
        top = float(z.max()) * 1.05
    else:
        top = 2.0
    slope = smap.metadata.get("dividing_line", {}).get("z_slope")
    if slope is not None:
        ax.plot([0.0, top], [0.0, slope * top], color="black", lw=0.6, ls="--", label="dividing line")
    ax.plot([0, top], [1, 1], color="0.6", lw=0.4)
    ax.plot([1, 1], [0, top], color="0.6", lw=0.4)
    ax.set_xlim(0, top)
    ax.set_ylim(0, top)
    ax.set_aspect("equal")
    ax.set_xlabel("1/q2")
    ax.set_ylabel("1/q3")
    if "masses" in smap.metadata:
        m = ", ".join(f"{v:g}" for v in smap.metadata["masses"])
        ax.set_title(f"masses ({m})")
    _legend(ax, loc="upper left", bbox_to_anchor=(1.0, 1.0))
    fig.tight_layout()
    return fig


def render_svg(smap, path: Optional[str] = None, hull: Optional[Polygon] = None) -> str:
    """SVG text for a stability map; identical input gives identical bytes."""
    _style()
    fig = _simplex_figure(smap, hull) if smap.chart == "simplex" else _charge_figure(smap)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", bbox_inches="tight", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def render_beta_scan(estimates, reference: float, path: Optional[str] = None) -> str:
    """Energy against beta with error bars and the reference bound."""
    _style()
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    b = [e.beta for e in estimates]
    ax.errorbar(b, [e.energy for e in estimates], yerr=[e.stderr for e in estimates], fmt="o", ms=3, color="k", capsize=2)
    ax.axhline(reference, color="#b2182b", lw=0.8, ls="--")
    ax.axhline(-0.5, color="0.5", lw=0.6, ls=":")
    ax.set_xlabel("beta")
    ax.set_ylabel("energy")
    buf = io.StringIO()
    fig.savefig(buf, format="svg", bbox_inches="tight", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text
