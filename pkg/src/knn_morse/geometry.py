"""Geometric predicates on small point subsets.

Circumspheres, barycentric coordinates, open-simplex membership and
general-position checks. Everything is plain double precision with explicit
tolerances; near-ties are reported as violations rather than resolved.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import AffinelyDependent, OutOfAffineHull


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every predicate.

    ``sphere`` and ``general_position`` are relative (multiplied by a length
    scale or a subset's own extent); ``barycentric`` is absolute because
    barycentric weights are dimensionless.
    """

    sphere: float = 1e-9
    barycentric: float = 1e-10
    general_position: float = 1e-7


DEFAULT_TOL = Tolerances()


class PointCloud:
    """A finite set of labeled points in R^d.

    Parameters
    ----------
    points : array_like
        ``(n, d)`` coordinates. A flat sequence is read as ``n`` points on the
        line.
    labels : sequence of int, optional
        Stable identifiers, one per point. Defaults to ``0..n-1``.
    dim : int, optional
        Ambient dimension, only needed when ``points`` is empty.
    """

    def __init__(self, points, labels=None, dim=None):
        pts = np.array(points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, dim if dim is not None else (pts.shape[-1] if pts.ndim == 2 else 1))
        elif pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {pts.shape}")
        if dim is not None and pts.shape[1] != dim:
            raise ValueError(f"expected {dim} coordinates per point, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        if labels is None:
            labels = range(len(pts))
        labels = tuple(int(v) for v in labels)
        if len(labels) != len(pts):
            raise ValueError("one label per point is required")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        pts.setflags(write=False)
        self.points = pts
        self.labels = labels
        self._row = {lab: i for i, lab in enumerate(labels)}
        self._scale = None

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self):
        return f"PointCloud(n={len(self)}, dim={self.dim})"

    @property
    def scale(self) -> float:
        """Bounding-box diameter, used to scale absolute tolerances."""
        if self._scale is None:
            self._scale = _extent(self.points)
        return self._scale

    def rows(self, labels) -> np.ndarray:
        return np.array([self._row[int(lab)] for lab in labels], dtype=np.intp)

    def coords(self, labels) -> np.ndarray:
        return self.points[self.rows(labels)]

    def label_tuple(self, rows) -> tuple:
        return tuple(self.labels[int(i)] for i in rows)


@dataclass(frozen=True)
class Circumsphere:
    """The minimal circumsphere of a subset: centered in the subset's affine hull."""

    center: np.ndarray
    radius: float
    support: tuple = ()


@dataclass(frozen=True)
class Violation:
    labels: tuple
    kind: str  # "coincidence" | "affine-dependence" | "cosphericity"


@dataclass(frozen=True)
class GeneralPositionReport:
    ok: bool
    violations: tuple = field(default_factory=tuple)
    exhaustive: bool = True


def _affine_frame(X, tol):
    """SVD frame of ``aff(X)``: base point, edge matrix and its factors."""
    X = np.asarray(X, dtype=float)
    x0 = X[0]
    A = X[1:] - x0
    if A.shape[0] > X.shape[1]:
        raise AffinelyDependent(f"{len(X)} points cannot be affinely independent in R^{X.shape[1]}")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size and (s[0] == 0.0 or s[-1] <= tol.general_position * s[0]):
        raise AffinelyDependent(
            f"subset is affinely dependent (singular values {s.tolist()})"
        )
    return x0, A, U, s, Vt


def circumsphere(X, support=(), tol: Tolerances = DEFAULT_TOL) -> Circumsphere:
    """Center and radius of the unique sphere through ``X`` centered in ``aff(X)``.

    Parameters
    ----------
    X : array_like
        ``(m, d)`` affinely independent points, ``1 <= m <= d + 1``.
    support : tuple, optional
        Labels carried into the result.

    Raises
    ------
    AffinelyDependent
        If the edge matrix is singular relative to its largest singular value.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("X must be a non-empty (m, d) array")
    if len(X) == 1:
        return Circumsphere(X[0].copy(), 0.0, tuple(support))
    x0, A, U, s, Vt = _affine_frame(X, tol)
    # equidistance: 2 <a_i, c - x0> = |a_i|^2 with c - x0 = Vt.T @ y
    b = 0.5 * np.einsum("ij,ij->i", A, A)
    y = (U.T @ b) / s
    center = x0 + Vt.T @ y
    radius = float(np.linalg.norm(center - x0))
    return Circumsphere(center, radius, tuple(support))


def barycentric_coords(q, X, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Affine weights ``w`` with ``sum(w) == 1`` and ``w @ X == q``.

    Raises
    ------
    OutOfAffineHull
        If ``q`` is farther than ``tol.sphere * scale`` from ``aff(X)``.
    """
    X = np.asarray(X, dtype=float)
    q = np.asarray(q, dtype=float)
    if scale is None:
        scale = _extent(np.vstack([X, q]))
    if len(X) == 1:
        if np.linalg.norm(q - X[0]) > tol.sphere * scale:
            raise OutOfAffineHull("query does not coincide with the single reference point")
        return np.ones(1)
    x0, A, U, s, Vt = _affine_frame(X, tol)
    v = q - x0
    coeff = Vt @ v
    residual = np.linalg.norm(v - Vt.T @ coeff)
    if residual > tol.sphere * scale:
        raise OutOfAffineHull(f"query is {residual:.3g} away from the affine hull")
    t = U @ (coeff / s)
    return np.concatenate([[1.0 - t.sum()], t])


def in_open_simplex(q, X, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> bool:
    """True iff ``q`` lies in the open simplex spanned by ``X``.

    For a single point this means ``q`` coincides with it.
    """
    X = np.asarray(X, dtype=float)
    if len(X) == 1:
        q = np.asarray(q, dtype=float)
        if scale is None:
            scale = 1.0
        return bool(np.linalg.norm(q - X[0]) <= tol.sphere * scale)
    w = barycentric_coords(q, X, tol=tol, scale=scale)
    return bool(np.all(w > tol.barycentric))


def _extent(X) -> float:
    X = np.asarray(X, dtype=float)
    if len(X) < 2:
        return 1.0
    e = float(np.linalg.norm(X.max(axis=0) - X.min(axis=0)))
    return e if e > 0 else 1.0


def circumspheres(points, subsets, tol: Tolerances = DEFAULT_TOL):
    """Vectorized circumspheres of many equal-size subsets.

    Solves the Gram system of each subset's edge vectors directly, which also
    yields the barycentric weights of the circumcenter for free.

    Parameters
    ----------
    points : ndarray, shape (n, d)
    subsets : ndarray of int, shape (B, m)

    Returns
    -------
    centers : ndarray (B, d)
    radii : ndarray (B,)
    weights : ndarray (B, m)
        Barycentric coordinates of each center with respect to its subset.
    ok : ndarray of bool (B,)
        False where the subset is affinely dependent within tolerance; the
        other outputs are meaningless there.
    """
    points = np.asarray(points, dtype=float)
    subsets = np.asarray(subsets, dtype=np.intp)
    B, m = subsets.shape
    d = points.shape[1]
    if m == 1:
        centers = points[subsets[:, 0]]
        return centers.copy(), np.zeros(B), np.ones((B, 1)), np.ones(B, dtype=bool)
    if m - 1 > d:
        raise AffinelyDependent(f"{m} points cannot be affinely independent in R^{d}")
    x0 = points[subsets[:, 0]]
    A = points[subsets[:, 1:]] - x0[:, None, :]
    G = np.einsum("bik,bjk->bij", A, A)
    rhs = 0.5 * np.einsum("bii->bi", G)
    q = m - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        if q == 1:
            g = G[:, 0, 0]
            t = (rhs[:, 0] / g)[:, None]
            ok = g > 0
        elif q == 2:
            a, b, c = G[:, 0, 0], G[:, 0, 1], G[:, 1, 1]
            det = a * c - b * b
            t = np.stack([(c * rhs[:, 0] - b * rhs[:, 1]) / det,
                          (a * rhs[:, 1] - b * rhs[:, 0]) / det], axis=1)
            tr = a + c
            disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
            lam_max = 0.5 * (tr + disc)
            lam_min = det / lam_max
            ok = (lam_max > 0) & (lam_min > tol.general_position ** 2 * lam_max)
        else:
            lam = np.linalg.eigvalsh(G)
            ok = (lam[:, -1] > 0) & (lam[:, 0] > tol.general_position ** 2 * lam[:, -1])
            Gs = np.where(ok[:, None, None], G, np.eye(q))
            t = np.linalg.solve(Gs, rhs[..., None])[..., 0]
    t = np.where(ok[:, None], t, np.nan)
    centers = x0 + np.einsum("bi,bik->bk", t, A)
    radii = np.linalg.norm(centers - x0, axis=1)
    weights = np.concatenate([1.0 - t.sum(axis=1, keepdims=True), t], axis=1)
    return centers, radii, weights, ok


def check_general_position(P: PointCloud, tol: Tolerances = DEFAULT_TOL, cutoff: int = 60) -> GeneralPositionReport:
    """Test the standing genericity assumptions on a cloud.

    Coincidences are always checked. For ``len(P) <= cutoff`` every subset of
    size up to ``d + 2`` is also tested for affine dependence and
    cosphericity; above the cutoff those tests are left to the enumeration,
    which raises on the candidate supports it actually meets.
    """
    n, d = len(P), P.dim
    pts = P.points
    band = tol.sphere * P.scale
    violations: list[Violation] = []
    if n >= 2:
        for i, j in sorted(cKDTree(pts).query_pairs(band)):
            violations.append(Violation(P.label_tuple((i, j)), "coincidence"))
    exhaustive = n <= cutoff
    if exhaustive:
        # affine dependence of 3..d+1 points (pairs are covered by coincidence)
        for m in range(3, min(d + 1, n) + 1):
            subs = np.array(list(itertools.combinations(range(n), m)), dtype=np.intp)
            _, _, _, ok = circumspheres(pts, subs, tol)
            for row in subs[~ok]:
                violations.append(Violation(P.label_tuple(row), "affine-dependence"))
        # cosphericity of d+2 points
        if n >= d + 2:
            subs = np.array(list(itertools.combinations(range(n), d + 1)), dtype=np.intp)
            centers, radii, _, ok = circumspheres(pts, subs, tol)
            seen = set()
            for s, c, r in zip(subs[ok], centers[ok], radii[ok]):
                dist = np.linalg.norm(pts - c, axis=1)
                hits = np.flatnonzero(np.abs(dist - r) <= band)
                for h in hits:
                    if h in s:
                        continue
                    key = tuple(sorted((*s.tolist(), int(h))))
                    if key not in seen:
                        seen.add(key)
                        violations.append(Violation(P.label_tuple(key), "cosphericity"))
    return GeneralPositionReport(ok=not violations, violations=tuple(violations), exhaustive=exhaustive)
