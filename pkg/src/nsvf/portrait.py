"""Static phase portraits as SVG.

Palette (fixed, also listed in the README):

    ===============  =========
    element          colour
    ===============  =========
    X arcs           #1f77b4
    Y arcs           #d62728
    sliding arcs     #2ca02c
    Sigma, sewing    #444444
    Sigma, sliding   #2ca02c
    Sigma, escaping  #ff7f0e
    tangency points  #000000
    start points     #7f7f7f
    ===============  =========
"""
from __future__ import annotations

import io
import math
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .filippov import FilippovSystem, Kind, SystemError_  # noqa: E402
from .flow import Deterministic, GlobalTrajectory, IntegrationOptions, Regime, integrate_global  # noqa: E402

PALETTE = {
    "X": "#1f77b4",
    "Y": "#d62728",
    "S": "#2ca02c",
    "sewing": "#444444",
    "sliding": "#2ca02c",
    "escaping": "#ff7f0e",
    "tangency": "#000000",
    "start": "#7f7f7f",
}
SIZE_PX = 1000

_RC = {
    "svg.hashsalt": "nsvf",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 14,
    "axes.linewidth": 1.0,
    "lines.solid_capstyle": "round",
}


def _grid_points(sys: FilippovSystem, n: int) -> list[tuple[float, float]]:
    xmin, xmax, ymin, ymax = sys.domain
    # cell centres, so no start point sits on the domain edge
    xs = [xmin + (i + 0.5) * (xmax - xmin) / n for i in range(n)]
    ys = [ymin + (j + 0.5) * (ymax - ymin) / n for j in range(n)]
    return [(x, y) for y in ys for x in xs]


def _draw_double_arrow(ax, x: float, y: float, direction: float, length: float, color: str):
    for k in (0.0, 0.45):
        x0 = x - direction * length * (0.5 - k)
        x1 = x0 + direction * length * 0.55
        ax.annotate("", xy=(x1, y), xytext=(x0, y),
                    arrowprops=dict(arrowstyle="-|>", color=color, lw=1.6, shrinkA=0, shrinkB=0,
                                    mutation_scale=16))


def _draw_sigma(ax, sys: FilippovSystem):
    xmin, xmax, ymin, ymax = sys.domain
    level = sys.sigma_level
    if level is None:
        gx = np.linspace(xmin, xmax, 301)
        gy = np.linspace(ymin, ymax, 301)
        F = np.array([[sys.fx(float(x), float(y)) for x in gx] for y in gy])
        ax.contour(gx, gy, F, levels=[0.0], colors=[PALETTE["sewing"]], linewidths=2.0)
        return
    if not ymin <= level <= ymax:
        return
    seg = sys.segment_sigma(xmin, xmax, n=801)
    arrow_len = 0.04 * (xmax - xmin)
    for iv in seg.intervals:
        name = iv.kind.value if iv.kind in (Kind.SEWING, Kind.SLIDING, Kind.ESCAPING) else "sewing"
        ax.plot([iv.a, iv.b], [level, level], color=PALETTE[name], lw=2.5, zorder=3)
        if iv.kind in (Kind.SLIDING, Kind.ESCAPING):
            width = iv.b - iv.a
            count = max(1, int(width / (4 * arrow_len)))
            for i in range(count):
                x = iv.a + (i + 0.5) * width / count
                v = sys.sliding_speed(x)
                if v != 0.0 and math.isfinite(v):
                    _draw_double_arrow(ax, x, level, math.copysign(1.0, v), arrow_len, PALETTE[name])
    tangencies = [b.point for b in seg.boundaries if b.kind is Kind.TANGENCY]
    if tangencies:
        ax.scatter([p[0] for p in tangencies], [p[1] for p in tangencies], s=60, color=PALETTE["tangency"],
                   zorder=5)


def _draw_trajectory(ax, traj: GlobalTrajectory):
    for arc in traj.arcs:
        if arc.regime is Regime.R:
            continue
        pts = arc.dense_points(4)
        ax.plot([p[1] for p in pts], [p[2] for p in pts], color=PALETTE[arc.regime.value], lw=1.0, zorder=2)


def render_portrait(sys: FilippovSystem, grid: int = 8, tmax: float = 10.0, policy=Deterministic("X"),
                    opts: Optional[IntegrationOptions] = None, title: Optional[str] = None,
                    fmt: str = "svg") -> bytes:
    """Image bytes (SVG by default) of trajectories from a ``grid`` x ``grid`` lattice of starts,
    with Sigma decorated."""
    if grid < 1:
        raise ValueError("grid must be at least 1")
    if tmax <= 0:
        raise ValueError("tmax must be positive")
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=(SIZE_PX / 72, SIZE_PX / 72), dpi=72)
        ax = fig.add_axes([0.08, 0.07, 0.88, 0.87])
        xmin, xmax, ymin, ymax = sys.domain
        starts = _grid_points(sys, grid)
        for p in starts:
            try:
                traj = integrate_global(sys, p, tmax, policy, opts=opts)
            except SystemError_:
                continue
            _draw_trajectory(ax, traj)
        ax.scatter([p[0] for p in starts], [p[1] for p in starts], s=8, color=PALETTE["start"], zorder=4)
        _draw_sigma(ax, sys)
        ax.set_xlim(xmin, xmax)
        ax.set_ylim(ymin, ymax)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(title if title is not None else (sys.name or "system"))
        buf = io.BytesIO()
        meta = {"Date": None, "Creator": None} if fmt == "svg" else None
        fig.savefig(buf, format=fmt, metadata=meta)
        plt.close(fig)
    return buf.getvalue()
