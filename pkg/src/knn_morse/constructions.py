"""Small hand-built point sets with known critical points.

Each function returns ``(points, k, support)`` where ``support`` lists the
row indices of the subset that generates the critical point of interest.
"""

from __future__ import annotations

import numpy as np


def _on_unit_circle(degrees):
    a = np.deg2rad(np.asarray(degrees, dtype=float))
    return np.stack([np.cos(a), np.sin(a)], axis=1)


def pair_birth():
    """Two points, k = 2: the midpoint is a minimum (index 0)."""
    return np.array([[0.0, -1.0], [0.0, 1.0]]), 2, (0, 1)


def pair_with_inner_point():
    """A pair with one point inside its diametral disk, k = 2: index 1."""
    return np.array([[0.0, -1.0], [0.0, 1.0], [0.1, 0.0]]), 2, (0, 1)


def acute_triangle():
    """Equilateral triangle on the unit circle, k = 2: index 1 with budget 2."""
    return _on_unit_circle([90, 210, 330]), 2, (0, 1, 2)


def triangle_with_inner_point():
    """The same triangle plus a point near its center, k = 2: index 2."""
    return np.vstack([_on_unit_circle([90, 210, 330]), [[0.1, 0.0]]]), 2, (0, 1, 2)


def index_panels():
    """The four configurations above in order of (boundary, interior) size."""
    return [pair_birth(), pair_with_inner_point(), acute_triangle(), triangle_with_inner_point()]


def merge_and_loop():
    """Seven points whose triangle critical point both merges and creates a loop.

    Three points lie on the unit circle around the origin (slightly off
    equilateral so that critical values stay distinct); four more lie
    outside the circle. At radius 1 with k = 2 the budget of 2 is spent as
    one merge of components and one new 1-cycle. The outer points were
    chosen so that nearby critical values are far enough apart for a
    512-cell grid to resolve the change.
    """
    outer = np.array([[0.866, 0.994], [-0.355, 1.363], [-0.685, 1.189], [-1.071, 0.836]])
    return np.vstack([_on_unit_circle([90, 209, 330]), outer]), 2, (0, 1, 2)


def square_corners():
    """Four cocircular points; violates general position."""
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def obtuse_triangle():
    """Its circumcenter ``(2, -3.75)`` lies outside the triangle."""
    return np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 0.5]])


def equilateral_triple(side: float = 1.0):
    """Three points at mutual distance ``side``; for k = 1 a hole exists for
    radii between ``side / 2`` and ``side / sqrt(3)``."""
    return side * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
