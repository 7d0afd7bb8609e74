"""Figures for the CLI reports.

Every function builds a :class:`matplotlib.figure.Figure` without touching
pyplot state, so figures can be rendered from worker processes and tests.
"""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle

INDEX_COLORS = ("tab:blue", "tab:orange", "tab:red", "tab:purple")


def _figure(width=6.0, height=None):
    golden = (5 ** 0.5 - 1) / 2
    return Figure(figsize=(width, height or width * golden), dpi=100, layout="constrained")


def critical_points_figure(P, crits, k: int, show_balls: bool = False) -> Figure:
    """Data points and critical centers colored by index (planar data)."""
    fig = _figure(5.5, 5.5)
    ax = fig.add_subplot()
    pts = P.points
    ax.scatter(pts[:, 0], pts[:, 1], s=14, c="black", label="data", zorder=3)
    for mu in sorted({cp.index for cp in crits}):
        sel = [cp for cp in crits if cp.index == mu]
        cs = np.array([cp.center for cp in sel])
        ax.scatter(cs[:, 0], cs[:, 1], s=22, marker="x", color=INDEX_COLORS[mu % 4],
                   label=f"index {mu} ({len(sel)})", zorder=4)
        if show_balls:
            for cp in sel:
                ax.add_patch(Circle(cp.center, cp.radius, fill=False, lw=0.5,
                                    color=INDEX_COLORS[mu % 4], alpha=0.4))
    ax.set_aspect("equal")
    ax.set_title(f"critical points, k = {k}")
    ax.legend(loc="best", fontsize="small")
    return fig


def filtration_figure(records, k: int) -> Figure:
    """Betti numbers on both sides of each critical value."""
    fig = _figure(7.0)
    ax = fig.add_subplot()
    r = np.array([rec.radius for rec in records])
    for dim, style in ((0, "-"), (1, "--")):
        before = [rec.betti_before[dim] for rec in records]
        after = [rec.betti_after[dim] for rec in records]
        xs = np.repeat(r, 2)
        ys = np.ravel(np.column_stack([before, after]))
        ax.plot(xs, ys, style, drawstyle="steps-post", label=f"b{dim}")
    bad = [rec for rec in records if not rec.passed]
    if bad:
        ax.scatter([rec.radius for rec in bad], [0] * len(bad), marker="v", color="red",
                   label=f"failed ({len(bad)})", zorder=5)
    ax.set_xlabel("radius")
    ax.set_ylabel("Betti number")
    ax.set_title(f"homology of the {k}-fold cover across critical values")
    ax.legend(loc="best", fontsize="small")
    return fig


def poisson_figure(est) -> Figure:
    """Mean counts against intensity, with error bars and fitted lines."""
    fig = _figure(6.0)
    ax = fig.add_subplot()
    nus = np.asarray(est.nus, dtype=float)
    for i in range(est.means.shape[1]):
        color = INDEX_COLORS[i % 4]
        ax.errorbar(nus, est.means[:, i], yerr=3 * est.stderr[:, i], fmt="o", ms=4,
                    color=color, capsize=3, label=f"index {i}")
        reg = est.regression.get(i)
        if reg is not None:
            grid = np.linspace(0, nus.max() * 1.05, 50)
            ax.plot(grid, reg.intercept + reg.slope * grid, lw=0.8, color=color)
    ax.set_xlabel("intensity")
    ax.set_ylabel("mean count in window")
    ax.set_title(f"critical points per index, d = {est.config.dim}, k = {est.config.k}")
    ax.legend(loc="best", fontsize="small")
    return fig


def save(fig: Figure, path) -> None:
    fig.savefig(path)
