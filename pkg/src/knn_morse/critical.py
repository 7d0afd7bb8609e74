"""Critical points of the k-NN distance function.

A subset ``X`` of the data, with circumcenter ``c`` and circumradius ``rho``,
produces a critical point exactly when ``c`` lies in the open simplex of
``X`` and the open ball ``B(c, rho)`` holds ``j`` data points with
``0 <= |X| + j - k <= d``. That number is the index. Enumeration runs this
test over every candidate subset of size up to ``d + 1``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls
from scipy.sparse import csr_matrix
from scipy.spatial import cKDTree

from .errors import AffinelyDependent, GeneralPositionViolation, KTooLarge, NotMorseWarning
from .geometry import (
    DEFAULT_TOL,
    Circumsphere,
    PointCloud,
    Tolerances,
    barycentric_coords,
    circumsphere,
    circumspheres,
)
from .knn import knn_distance, point_distances

BRUTE_FORCE_MAX = 60


@dataclass(frozen=True)
class CriticalPoint:
    """One critical point with its combinatorial data.

    ``boundary`` holds the labels on the critical sphere and ``weights`` the
    (strictly positive) barycentric coefficients of ``center`` with respect
    to them, in the same order. ``interior`` holds labels strictly inside.
    """

    center: tuple
    radius: float
    boundary: tuple
    interior: tuple
    index: int
    delta: int
    weights: tuple

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    def sort_key(self):
        return (self.radius, self.boundary)


@dataclass(frozen=True)
class CandidateSubset:
    """A subset of data labels together with its minimal circumsphere."""

    labels: tuple
    circumsphere: Circumsphere

    @classmethod
    def from_labels(cls, labels, P: PointCloud, tol: Tolerances = DEFAULT_TOL):
        labels = tuple(sorted(int(v) for v in labels))
        return cls(labels, circumsphere(P.coords(labels), labels, tol))


@dataclass(frozen=True)
class MorseValidation:
    distinct_values: bool
    min_gap: float
    nondegenerate: bool


def delta(n_boundary: int, index: int) -> int:
    """Number of homology changes at a critical point: C(n_boundary - 1, index)."""
    return math.comb(n_boundary - 1, index)


def _window_arrays(window, dim):
    if window is None:
        return None
    lo, hi = (np.asarray(w, dtype=float).reshape(dim) for w in window)
    if np.any(hi < lo):
        raise ValueError("window upper corner must dominate the lower corner")
    return lo, hi


def _in_window(centers, win):
    if win is None:
        return np.ones(len(centers), dtype=bool)
    lo, hi = win
    return np.all((centers >= lo) & (centers <= hi), axis=1)


def classify(X, P: PointCloud, k: int, tol: Tolerances = DEFAULT_TOL) -> CriticalPoint | None:
    """Decide whether the labeled subset ``X`` generates a critical point.

    Returns ``None`` when it does not.

    Raises
    ------
    GeneralPositionViolation
        If the center is in the open simplex of ``X``, at most ``k - 1`` points
        are strictly inside the sphere, and some other data point lies on the
        sphere within tolerance.
    """
    if isinstance(X, CandidateSubset):
        X = X.labels
    labels = tuple(sorted(int(v) for v in X))
    rows = P.rows(labels)
    m = len(rows)
    if m == 0 or m > P.dim + 1:
        return None
    pts = P.points[rows]
    try:
        sphere = circumsphere(pts, labels, tol)
    except AffinelyDependent:
        return None
    c, rho = sphere.center, sphere.radius
    scale = P.scale
    if m == 1:
        weights = np.ones(1)
    else:
        weights = barycentric_coords(c, pts, tol=tol, scale=scale)
        if not np.all(weights > tol.barycentric):
            return None
    dist = point_distances(P.points, c)
    others = np.ones(len(P), dtype=bool)
    others[rows] = False
    band = tol.sphere * scale
    inner = others & (dist < rho - band)
    on_sphere = others & (np.abs(dist - rho) <= band)
    j = int(np.count_nonzero(inner))
    if j >= k:
        return None
    if np.any(on_sphere):
        extra = P.label_tuple(np.flatnonzero(on_sphere))
        raise GeneralPositionViolation(
            f"points {extra} lie on the circumsphere of {labels}", labels + extra
        )
    index = m + j - k
    if not 0 <= index <= P.dim:
        return None
    interior = tuple(sorted(P.label_tuple(np.flatnonzero(inner))))
    return CriticalPoint(
        center=tuple(float(v) for v in c),
        radius=float(rho),
        boundary=labels,
        interior=interior,
        index=index,
        delta=delta(m, index),
        weights=tuple(float(w) for w in weights),
    )


def radius_bound(points, k: int, box, cells: int = 4096) -> float:
    """Rigorous upper bound on the k-NN distance over an axis-aligned box.

    Samples cell centers of a grid covering the box and adds the cell
    half-diagonal, which is valid because the function is 1-Lipschitz.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    d = len(lo)
    per_axis = max(2, int(round(cells ** (1.0 / d))))
    step = (hi - lo) / per_axis
    axes = [lo[i] + (np.arange(per_axis) + 0.5) * step[i] for i in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals, _ = cKDTree(points).query(grid, k=[k])
    return float(vals.max() + 0.5 * np.linalg.norm(step))


def _extend_cliques(cliques, upper: csr_matrix, adj: np.ndarray):
    """Append one vertex, larger than the last, adjacent to every member."""
    last = cliques[:, -1]
    counts = np.diff(upper.indptr)[last]
    if counts.sum() == 0:
        return np.empty((0, cliques.shape[1] + 1), dtype=np.intp)
    owner = np.repeat(np.arange(len(cliques)), counts)
    starts = upper.indptr[last]
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    cand = upper.indices[np.repeat(starts, counts) + offsets]
    keep = np.ones(len(cand), dtype=bool)
    for col in range(cliques.shape[1] - 1):
        keep &= adj[cliques[owner, col], cand]
    return np.hstack([cliques[owner[keep]], cand[keep, None]]).astype(np.intp)


def candidate_subsets(P: PointCloud, k: int, window=None, brute_force_max: int = BRUTE_FORCE_MAX):
    """Yield ``(m, subsets, radius_limit)`` for each candidate size ``m``.

    Small clouds get every subset. Larger ones keep only cliques of the graph
    joining points at distance at most ``2R``, where ``R`` bounds the k-NN
    distance over the region that can hold a wanted center.
    """
    n, d = len(P), P.dim
    pts = P.points
    sizes = range(1 if k == 1 else 2, min(d + 1, n) + 1)
    if n <= brute_force_max:
        for m in sizes:
            subs = np.array(list(itertools.combinations(range(n), m)), dtype=np.intp).reshape(-1, m)
            yield m, subs, math.inf
        return
    win = _window_arrays(window, d)
    box = win if win is not None else (pts.min(axis=0), pts.max(axis=0))
    R = radius_bound(pts, k, box)
    lo, hi = box
    eligible = np.flatnonzero(np.all((pts >= lo - R) & (pts <= hi + R), axis=1))
    tree = cKDTree(pts[eligible])
    pairs = tree.query_pairs(2.0 * R, output_type="ndarray")
    pairs = eligible[pairs] if len(pairs) else np.empty((0, 2), dtype=np.intp)
    pairs.sort(axis=1)
    upper = csr_matrix(
        (np.ones(len(pairs), dtype=bool), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    upper.sort_indices()
    adj = np.zeros((n, n), dtype=bool)
    adj[pairs[:, 0], pairs[:, 1]] = True
    adj[pairs[:, 1], pairs[:, 0]] = True
    cliques = eligible[:, None].astype(np.intp)
    for m in range(1, max(sizes) + 1):
        if m > 1:
            cliques = _extend_cliques(cliques, upper, adj)
        if m in sizes:
            yield m, cliques, R


def _screen(P, k, m, subs, R, win, tol) -> list[CriticalPoint]:
    """Vectorized version of :func:`classify` over one batch of subsets.

    Raises on the same on-sphere conditions as ``classify``.
    """
    if len(subs) == 0:
        return []
    pts = P.points
    n = len(P)
    centers, radii, weights, ok = circumspheres(pts, subs, tol)
    keep = ok & np.all(weights > tol.barycentric, axis=1)
    keep &= _in_window(np.where(ok[:, None], centers, 0.0), win)
    if math.isfinite(R):
        keep &= radii <= R * (1 + 1e-12)
    subs, centers, radii, weights = subs[keep], centers[keep], radii[keep], weights[keep]
    if len(subs) == 0:
        return []
    band = tol.sphere * P.scale
    nq = min(n, m + k)
    dist, idx = cKDTree(pts).query(centers, k=nq)
    dist = dist.reshape(len(subs), nq)
    idx = idx.reshape(len(subs), nq)
    member = np.zeros_like(idx, dtype=bool)
    for col in range(m):
        member |= idx == subs[:, col:col + 1]
    inner = (~member) & (dist < (radii - band)[:, None])
    near = (~member) & (np.abs(dist - radii[:, None]) <= band)
    j = inner.sum(axis=1)
    # with j <= k-1 the m members and the j inner points fit among the nq
    # queried neighbours, so any further point within the band shows up here
    too_many = j >= k
    bad = (~too_many) & near.any(axis=1)
    if np.any(bad):
        row = int(np.flatnonzero(bad)[0])
        labels = P.label_tuple(subs[row])
        raise GeneralPositionViolation(
            f"a data point lies on the circumsphere of {labels}", labels
        )
    index = m + j - k
    keep = np.flatnonzero((~too_many) & (index >= 0) & (index <= P.dim))
    out = []
    for r in keep:
        order = np.argsort([P.labels[i] for i in subs[r]])
        mu = int(index[r])
        out.append(CriticalPoint(
            center=tuple(float(v) for v in centers[r]),
            radius=float(radii[r]),
            boundary=P.label_tuple(subs[r][order]),
            interior=tuple(sorted(P.label_tuple(idx[r][inner[r]]))),
            index=mu,
            delta=delta(m, mu),
            weights=tuple(float(w) for w in weights[r][order]),
        ))
    return out


def enumerate_critical_points(
    P: PointCloud,
    k: int,
    window=None,
    tol: Tolerances = DEFAULT_TOL,
    brute_force_max: int = BRUTE_FORCE_MAX,
    warn: bool = True,
) -> list[CriticalPoint]:
    """All critical points of the k-NN distance, optionally restricted to a box.

    Parameters
    ----------
    P : PointCloud
    k : int
        Neighbor order, ``1 <= k <= len(P)``.
    window : pair of array_like, optional
        ``(lo, hi)`` corners. A critical point is kept iff its center lies in
        the closed box; every data point still takes part.
    brute_force_max : int
        Clouds up to this size are scanned exhaustively; larger ones are
        pruned through a neighbor graph, which does not change the result.

    Returns
    -------
    list of CriticalPoint
        Sorted by radius, then by boundary labels.
    """
    n = len(P)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of points ({n})")
    win = _window_arrays(window, P.dim)
    found = []
    for m, subs, R in candidate_subsets(P, k, window, brute_force_max):
        found.extend(_screen(P, k, m, subs, R, win, tol))
    found.sort(key=CriticalPoint.sort_key)
    if warn and found and not validate_morse(found, tol=tol, scale=P.scale).distinct_values:
        warnings.warn("two critical values coincide; the function is not Morse", NotMorseWarning, stacklevel=2)
    return found


def euler_sum(crits) -> int:
    """Sum of ``(-1)^index * delta``; equals 1 over a complete enumeration."""
    return sum((-1) ** cp.index * cp.delta for cp in crits)


def _zero_radius_minimum(cp: CriticalPoint) -> bool:
    return cp.n_boundary == 1


def validate_morse(crits, P: PointCloud | None = None, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> MorseValidation:
    """Check that critical values are distinct and critical points non-degenerate.

    The zero-radius minima that exist for ``k = 1`` (one per data point) share
    the level 0 by construction and are left out of the distinctness test.
    When ``P`` is given, every boundary set is re-tested for affine
    independence and for extra on-sphere points.
    """
    if scale is None:
        scale = P.scale if P is not None else 1.0
    radii = sorted(cp.radius for cp in crits if not _zero_radius_minimum(cp))
    gaps = np.diff(radii)
    min_gap = float(gaps.min()) if gaps.size else math.inf
    distinct = bool(min_gap > tol.sphere * scale)
    nondegenerate = all(all(w > tol.barycentric for w in cp.weights) for cp in crits)
    if P is not None and nondegenerate:
        band = tol.sphere * P.scale
        for cp in crits:
            try:
                circumsphere(P.coords(cp.boundary), tol=tol)
            except AffinelyDependent:
                nondegenerate = False
                break
            dist = point_distances(P.points, cp.center)
            on = np.abs(dist - cp.radius) <= band
            if np.count_nonzero(on) != cp.n_boundary:
                nondegenerate = False
                break
    return MorseValidation(distinct, min_gap, nondegenerate)


def generalized_gradient_weights(P: PointCloud, k: int, c, tol: Tolerances = DEFAULT_TOL):
    """Convex weights expressing zero through the active gradients at ``c``.

    The active pieces at ``c`` are the squared distances to the points lying
    exactly at the k-NN distance; their gradients are ``2 (c - p)``. Zero is
    written as a convex combination of them by non-negative least squares.

    Returns
    -------
    (labels, weights) or None
        ``None`` when zero is not in the convex hull.
    """
    r = knn_distance(P, k, c, tol).value
    dist = point_distances(P.points, c)
    active = np.flatnonzero(np.abs(dist - r) <= tol.sphere * P.scale)
    labels = P.label_tuple(active)
    if r == 0.0:
        return labels, np.full(len(active), 1.0 / len(active))
    grads = (np.asarray(c, dtype=float) - P.points[active]) / r
    A = np.vstack([grads.T, np.ones(len(active))])
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    lam, resid = nnls(A, b)
    if resid > 1e-9:
        return None
    return labels, lam


def clarke_check(cp: CriticalPoint, P: PointCloud, k: int, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Independent criticality test at ``cp.center`` from the function itself.

    Zero must be a strictly positive convex combination of the active
    gradients, i.e. lie in the relative interior of the generalized gradient.
    """
    return zero_in_generalized_gradient(P, k, cp.center, tol)


def zero_in_generalized_gradient(P: PointCloud, k: int, c, tol: Tolerances = DEFAULT_TOL) -> bool:
    res = generalized_gradient_weights(P, k, c, tol)
    if res is None:
        return False
    return bool(np.all(res[1] > tol.barycentric))
