"""Exact Betti numbers of a planar k-fold cover by tracing its boundary.

The boundary of ``{x : at least k of the closed disks of radius r contain x}``
is a union of circular arcs. An arc of circle ``i`` belongs to it exactly
when ``k - 1`` of the other disks cover the arc; traversing such arcs
counter-clockwise around their own circle keeps the covered region on the
left. Linking arcs at circle crossings yields closed cycles: outer
boundaries of components turn positively and boundaries of holes turn
negatively, so the signs of the enclosed areas give ``b_0`` and ``b_1``.

This is an alternative to rasterization when critical values sit too close
together for any practical grid to separate them.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateArrangement

TWO_PI = 2.0 * math.pi


def _arc_area(center, r, t0, t1):
    """Contribution ``1/2 * integral(x dy - y dx)`` of one CCW arc."""
    a, b = center
    return 0.5 * (r * (a * (math.sin(t1) - math.sin(t0)) - b * (math.cos(t1) - math.cos(t0)))
                  + r * r * (t1 - t0))


def kfold_betti_exact(points, k: int, r: float, margin: float = 1e-12) -> tuple[int, int]:
    """``(b_0, b_1)`` of the k-fold cover of planar ``points`` at radius ``r``.

    Parameters
    ----------
    points : array_like, shape (n, 2)
    k : int
    r : float
    margin : float
        Relative distance below which an arc midpoint is considered to touch
        another circle; such near-tangent arrangements are refused.

    Raises
    ------
    DegenerateArrangement
        When the arrangement is too close to a tangency or a triple crossing
        to be traced reliably.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if r < 0 or n < k:
        return 0, 0
    if r == 0:
        return (n if k == 1 else 0), 0
    tree = cKDTree(pts)
    pairs = tree.query_pairs(2.0 * r, output_type="ndarray")
    # angles of crossing points on each circle, tagged with a vertex id
    on_circle: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    vid = 0
    for i, j in pairs:
        v = pts[j] - pts[i]
        dist = math.hypot(v[0], v[1])
        if dist == 0.0:
            raise DegenerateArrangement(f"points {i} and {j} coincide")
        if dist >= 2.0 * r * (1.0 - margin):
            if dist <= 2.0 * r * (1.0 + margin):
                raise DegenerateArrangement(f"circles {i} and {j} are nearly tangent")
            continue
        base = math.atan2(v[1], v[0])
        half = math.acos(dist / (2.0 * r))
        # vertex vid sits at angle base+half on circle i and, seen from j,
        # at the mirrored angle; vid+1 is the other crossing
        on_circle[i].append(((base + half) % TWO_PI, vid))
        on_circle[i].append(((base - half) % TWO_PI, vid + 1))
        on_circle[j].append(((base + math.pi - half) % TWO_PI, vid))
        on_circle[j].append(((base + math.pi + half) % TWO_PI, vid + 1))
        vid += 2

    starts: dict[int, int] = {}
    arcs = []  # (circle, t0, t1, start vertex, end vertex)
    full_cycles = []
    tol = margin * r
    for i in range(n):
        marks = sorted(on_circle[i])
        if marks:
            ang = np.array([m[0] for m in marks])
            nxt = np.append(ang[1:], ang[0] + TWO_PI)
            mids = 0.5 * (ang + nxt)
        else:
            mids = np.array([0.0])
        q = pts[i] + r * np.stack([np.cos(mids), np.sin(mids)], axis=1)
        near = tree.query_ball_point(q, r * (1.0 + 2.0 * margin))
        for a, (qa, idx) in enumerate(zip(q, near)):
            idx = [j for j in idx if j != i]
            d = np.hypot(*(pts[idx] - qa).T) if idx else np.empty(0)
            if np.any(np.abs(d - r) <= tol):
                raise DegenerateArrangement(f"arc midpoint on circle {i} touches another circle")
            if int(np.count_nonzero(d < r)) != k - 1:
                continue
            if not marks:
                full_cycles.append(math.pi * r * r)
                continue
            t0, t1 = ang[a], nxt[a]
            u, w = marks[a][1], marks[(a + 1) % len(marks)][1]
            if u in starts:
                raise DegenerateArrangement("two boundary arcs leave the same crossing")
            starts[u] = len(arcs)
            arcs.append((i, t0, t1, u, w))

    seen = np.zeros(len(arcs), dtype=bool)
    areas = list(full_cycles)
    for s in range(len(arcs)):
        if seen[s]:
            continue
        area = 0.0
        cur = s
        while not seen[cur]:
            seen[cur] = True
            i, t0, t1, _, w = arcs[cur]
            area += _arc_area(pts[i], r, t0, t1)
            if w not in starts:
                raise DegenerateArrangement("boundary arc ends at a crossing with no continuation")
            cur = starts[w]
        if cur != s:
            raise DegenerateArrangement("boundary arcs do not close into simple cycles")
        areas.append(area)
    b0 = sum(1 for a in areas if a > 0)
    b1 = sum(1 for a in areas if a < 0)
    return b0, b1
