"""Evaluation of the k-th nearest neighbor distance function.

Every query is a full scan plus a selection; there is no spatial index here
on purpose, so these functions can serve as the reference the rest of the
package is checked against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import KTooLarge, TooManySubsets
from .geometry import DEFAULT_TOL, PointCloud, Tolerances


@dataclass(frozen=True)
class KnnQueryResult:
    """Value of the k-NN distance at one query point.

    Attributes
    ----------
    value : float
        The k-th smallest distance from the query to the cloud.
    kth_neighbor : int
        Label of the point realizing ``value``.
    sorted_prefix : tuple of (label, distance)
        The ``k`` nearest points in increasing distance.
    tie : bool
        Another point sits at distance ``value`` within tolerance, which only
        happens off general position.
    """

    value: float
    kth_neighbor: int
    sorted_prefix: tuple
    tie: bool = False


def _check_k(n, k):
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of points ({n})")


def point_distances(points, x) -> np.ndarray:
    """Euclidean distances from ``x`` to every row of ``points``."""
    diff = np.asarray(points, dtype=float) - np.asarray(x, dtype=float)
    return np.sqrt((diff * diff).sum(axis=-1))


def knn_distance(P: PointCloud, k: int, x, tol: Tolerances = DEFAULT_TOL) -> KnnQueryResult:
    _check_k(len(P), k)
    dist = point_distances(P.points, x)
    order = np.argsort(dist, kind="stable")
    value = float(dist[order[k - 1]])
    others = np.delete(dist, order[k - 1])
    tie = bool(others.size and np.any(np.abs(others - value) <= tol.sphere * P.scale))
    prefix = tuple((P.labels[i], float(dist[i])) for i in order[:k])
    return KnnQueryResult(value, P.labels[order[k - 1]], prefix, tie)


def knn_distances(P: PointCloud, k: int, X, chunk: int = 1 << 16) -> np.ndarray:
    """k-NN distance at each row of ``X``.

    Uses the same distance arithmetic as :func:`knn_distance`, so values agree
    bit for bit.
    """
    _check_k(len(P), k)
    X = np.asarray(X, dtype=float).reshape(-1, P.dim)
    out = np.empty(len(X))
    step = max(1, chunk // max(len(P), 1))
    for s in range(0, len(X), step):
        dist = point_distances(P.points[None, :, :], X[s:s + step, None, :])
        out[s:s + step] = np.partition(dist, k - 1, axis=1)[:, k - 1]
    return out


def minmax_eval(P: PointCloud, k: int, x, max_subsets: int = 10**6) -> float:
    """Min over all k-subsets of the max distance from ``x`` to the subset.

    An independent route to the k-NN distance through its min-max form.
    """
    n = len(P)
    _check_k(n, k)
    count = math.comb(n, k)
    if count > max_subsets:
        raise TooManySubsets(f"C({n}, {k}) = {count} subsets exceeds the guard {max_subsets}")
    dist = point_distances(P.points, x)
    best = math.inf
    combos = itertools.combinations(range(n), k)
    while True:
        block = np.array(list(itertools.islice(combos, 4096)), dtype=np.intp)
        if block.size == 0:
            break
        best = min(best, float(dist[block].max(axis=1).min()))
    return best


def order_k_cell_contains(X, P: PointCloud, y, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``y`` lies in the order-k Voronoi cell of the labeled subset ``X``.

    True iff every point of ``X`` is at most as far from ``y`` as every point
    outside ``X``, up to ``tol.sphere * P.scale``.
    """
    rows = P.rows(X)
    dist = point_distances(P.points, y)
    inside = np.zeros(len(P), dtype=bool)
    inside[rows] = True
    if inside.all():
        return True
    return bool(dist[inside].max() <= dist[~inside].min() + tol.sphere * P.scale)


def in_kfold_cover(P: PointCloud, k: int, x, r: float) -> bool:
    """Direct count: at least ``k`` points within distance ``r`` of ``x``."""
    return int(np.count_nonzero(point_distances(P.points, x) <= r)) >= k
