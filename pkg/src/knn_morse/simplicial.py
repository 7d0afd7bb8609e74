"""Finite simplicial complexes and their mod-2 homology.

Only what the auxiliary complex of a critical point needs: complexes given
by their maximal simplices, full skeleta of a simplex, and Betti numbers from
ranks of boundary matrices over the two-element field.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .critical import CriticalPoint
from .errors import TooLarge
from .geometry import DEFAULT_TOL, PointCloud, Tolerances
from .knn import order_k_cell_contains

MAX_SIMPLICES = 10**5


@dataclass(frozen=True)
class BettiVector:
    """Betti numbers ``b_0, b_1, ...``; entries past the end read as zero."""

    betti: tuple = ()

    def __post_init__(self):
        vals = tuple(int(b) for b in self.betti)
        if any(b < 0 for b in vals):
            raise ValueError("Betti numbers are nonnegative")
        object.__setattr__(self, "betti", vals)

    def __getitem__(self, i: int) -> int:
        if i < 0:
            return 0
        return self.betti[i] if i < len(self.betti) else 0

    def __len__(self):
        return len(self.betti)

    def __iter__(self):
        return iter(self.betti)

    def padded(self, length: int) -> tuple:
        return tuple(self[i] for i in range(length))

    def __eq__(self, other):
        if not isinstance(other, BettiVector):
            other = BettiVector(tuple(other))
        n = max(len(self), len(other))
        return self.padded(n) == other.padded(n)

    def __hash__(self):
        vals = list(self.betti)
        while vals and vals[-1] == 0:
            vals.pop()
        return hash(tuple(vals))

    @property
    def euler(self) -> int:
        return sum((-1) ** i * b for i, b in enumerate(self.betti))


@dataclass(frozen=True)
class SimplicialComplex:
    """A face-closed family of simplices on a vertex set.

    Simplices are stored as sorted tuples of vertex labels; the empty simplex
    is not stored.
    """

    vertices: tuple
    simplices: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_maximal(cls, maximal, vertices=None) -> "SimplicialComplex":
        """Close a family of simplices under taking nonempty faces."""
        faces = set()
        for s in maximal:
            s = tuple(sorted(s))
            for size in range(1, len(s) + 1):
                faces.update(itertools.combinations(s, size))
        if vertices is None:
            vertices = sorted({v for f in faces for v in f})
        return cls(tuple(vertices), frozenset(faces))

    def __post_init__(self):
        verts = set(self.vertices)
        for s in self.simplices:
            if not set(s) <= verts:
                raise ValueError(f"simplex {s} uses unknown vertices")
            for size in range(1, len(s)):
                for f in itertools.combinations(s, size):
                    if f not in self.simplices:
                        raise ValueError(f"face {f} of {s} is missing")

    @property
    def dimension(self) -> int:
        """Largest simplex dimension, ``-1`` for the empty complex."""
        return max((len(s) for s in self.simplices), default=0) - 1

    def by_dimension(self, q: int) -> list:
        return sorted(s for s in self.simplices if len(s) == q + 1)

    def f_vector(self) -> tuple:
        return tuple(len(self.by_dimension(q)) for q in range(self.dimension + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** q * f for q, f in enumerate(self.f_vector()))

    def __len__(self):
        return len(self.simplices)


def skeleton_complex(n_vertices: int, skeleton_dim: int) -> SimplicialComplex:
    """All faces of dimension at most ``skeleton_dim`` of the simplex on ``1..n``.

    ``skeleton_dim = -1`` gives the empty complex (which is what an index-0
    critical point produces).
    """
    if n_vertices < 0 or skeleton_dim < -1 or skeleton_dim > n_vertices - 1:
        raise ValueError(f"no {skeleton_dim}-skeleton of a simplex on {n_vertices} vertices")
    verts = tuple(range(1, n_vertices + 1))
    faces = frozenset(
        s for size in range(1, skeleton_dim + 2) for s in itertools.combinations(verts, size)
    )
    return SimplicialComplex(verts, faces)


def gf2_rank(rows) -> int:
    """Rank over GF(2) of a matrix given as a list of integer bitmasks."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top in pivots:
                row ^= pivots[top]
            else:
                pivots[top] = row
                rank += 1
                break
    return rank


def boundary_rank(K: SimplicialComplex, q: int) -> int:
    """Rank of the boundary map from q-chains to (q-1)-chains, mod 2."""
    if q <= 0:
        return 0
    lower = {s: i for i, s in enumerate(K.by_dimension(q - 1))}
    rows = []
    for s in K.by_dimension(q):
        mask = 0
        for f in itertools.combinations(s, q):
            mask |= 1 << lower[f]
        rows.append(mask)
    return gf2_rank(rows)


def betti_gf2(K: SimplicialComplex, max_simplices: int = MAX_SIMPLICES) -> BettiVector:
    """Betti numbers of ``K`` with coefficients in GF(2).

    Raises
    ------
    TooLarge
        If ``K`` has more than ``max_simplices`` simplices.
    """
    if len(K) > max_simplices:
        raise TooLarge(f"complex has {len(K)} simplices, limit is {max_simplices}")
    top = K.dimension
    if top < 0:
        return BettiVector(())
    f = K.f_vector()
    ranks = [boundary_rank(K, q) for q in range(top + 2)]
    return BettiVector(tuple(f[q] - ranks[q] - ranks[q + 1] for q in range(top + 1)))


def closed_form_betti(n_boundary: int, index: int) -> BettiVector:
    """Closed-form Betti numbers of the (index-1)-skeleton on ``n_boundary`` vertices."""
    if index == 0:
        return BettiVector(())
    if index == 1:
        return BettiVector((n_boundary,))
    b = [0] * index
    b[0] = 1
    b[index - 1] = math.comb(n_boundary - 1, index)
    return BettiVector(tuple(b))


@dataclass(frozen=True)
class AuxiliaryComplex:
    """Data behind the auxiliary complex of one critical point.

    ``local`` maps local vertex numbers ``1..N`` to boundary labels (sorted).
    ``active`` lists the k-subsets whose order-k cell contains the center and
    ``complements`` the matching boundary complements, in local numbering.
    """

    local: tuple
    active: tuple
    complements: tuple
    complex: SimplicialComplex

    def matches_skeleton(self, index: int) -> bool:
        expected = skeleton_complex(len(self.local), index - 1)
        return self.complex.simplices == expected.simplices


def auxiliary_complex_from_data(
    cp: CriticalPoint, P: PointCloud, k: int, tol: Tolerances = DEFAULT_TOL
) -> AuxiliaryComplex:
    """Build the nerve of the complements of the active k-subsets at ``cp``.

    Every k-subset made of the interior points plus ``k - N_I`` boundary
    points is tested for containing the center in its order-k Voronoi cell.
    """
    boundary = tuple(sorted(cp.boundary))
    number = {lab: i + 1 for i, lab in enumerate(boundary)}
    take = k - cp.n_interior
    if take < 0 or take > len(boundary):
        raise ValueError("critical point is inconsistent with k")
    active, complements = [], []
    for chosen in itertools.combinations(boundary, take):
        Pj = tuple(sorted(cp.interior + chosen))
        if order_k_cell_contains(Pj, P, cp.center, tol):
            active.append(Pj)
            complements.append(tuple(number[b] for b in boundary if b not in chosen))
    K = SimplicialComplex.from_maximal([c for c in complements if c], vertices=range(1, len(boundary) + 1))
    return AuxiliaryComplex(boundary, tuple(active), tuple(complements), K)
