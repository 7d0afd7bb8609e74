"""Grid oracle for the homology of planar k-fold covers.

The k-NN distance is sampled at the centers of a square grid. For a radius
``r`` the covered cells (value at most ``r``) span a cubical complex: one
vertex per covered cell, an edge between covered cells sharing a side, and a
square for every fully covered 2x2 block. Its components are counted by
4-connected labeling and ``b_1 = b_0 - chi``.

:func:`homology_change_report` compares the Betti numbers just below and
just above every critical value with the predicted budget
``C(N_boundary - 1, index)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .critical import CriticalPoint
from .errors import DegenerateArrangement, ResolutionTooLow, UnstableGrid
from .geometry import PointCloud
from .knn import knn_distances
from .planar import kfold_betti_exact
from .simplicial import BettiVector

MIN_RESOLUTION = 64
_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class GridField:
    """k-NN distance sampled at cell centers of a square grid.

    ``values[i, j]`` belongs to the cell whose center is
    ``lo + (i + 0.5, j + 0.5) * cell``.
    """

    lo: np.ndarray
    hi: np.ndarray
    resolution: int
    values: np.ndarray
    k: int = 1

    @property
    def bounds(self):
        return self.lo, self.hi

    @property
    def cell(self) -> np.ndarray:
        return (self.hi - self.lo) / self.resolution

    def center(self, i: int, j: int) -> np.ndarray:
        return self.lo + (np.array([i, j]) + 0.5) * self.cell


def cell_centers(lo, hi, resolution: int) -> np.ndarray:
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    step = (hi - lo) / resolution
    xs = lo[0] + (np.arange(resolution) + 0.5) * step[0]
    ys = lo[1] + (np.arange(resolution) + 0.5) * step[1]
    return np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)


def sample_grid(P: PointCloud, k: int, bounds, resolution: int) -> GridField:
    """Evaluate the k-NN distance on a ``resolution x resolution`` grid.

    Raises
    ------
    ResolutionTooLow
        Below 64 cells per axis.
    """
    if P.dim != 2:
        raise ValueError("the grid oracle is planar only")
    if resolution < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution {resolution} is below {MIN_RESOLUTION}")
    lo, hi = (np.asarray(b, dtype=float).reshape(2) for b in bounds)
    if np.any(hi <= lo):
        raise ValueError("bounds must have positive extent")
    vals = knn_distances(P, k, cell_centers(lo, hi, resolution)).reshape(resolution, resolution)
    vals.setflags(write=False)
    return GridField(lo, hi, resolution, vals, k)


def betti_covered(covered: np.ndarray) -> BettiVector:
    """``(b_0, b_1)`` of the cell-center complex of a boolean mask."""
    covered = np.asarray(covered, dtype=bool)
    _, b0 = ndimage.label(covered, structure=_FOUR)
    v = int(np.count_nonzero(covered))
    e = int(np.count_nonzero(covered[1:] & covered[:-1]) + np.count_nonzero(covered[:, 1:] & covered[:, :-1]))
    f = int(np.count_nonzero(covered[1:, 1:] & covered[:-1, 1:] & covered[1:, :-1] & covered[:-1, :-1]))
    return BettiVector((b0, b0 - (v - e + f)))


def betti_sublevel(grid: GridField, r: float) -> BettiVector:
    """Betti numbers of the rasterized sublevel set ``{value <= r}``."""
    return betti_covered(grid.values <= r)


@dataclass
class FiltrationRecord:
    """Betti numbers around one critical value and the resulting verdict.

    ``oracle`` names the source of ``betti_before``/``betti_after``. The
    boundary-tracing computation (``"exact"``) is used whenever it succeeds;
    the grid (``"grid"``) is evaluated whenever the window
    ``[r - eps, r + eps]`` spans a few cells of the coarser grid, and
    ``grid_agrees`` tells whether it matched. Rasterization can miss necks
    and holes thinner than a cell, which happens near corners of the cover
    however small the cell, so a disagreement is recorded rather than
    treated as a failure.
    """

    radius: float
    index: int
    delta: int
    n_boundary: int
    boundary: tuple
    interior: tuple
    epsilon: float
    resolutions: tuple
    oracle: str
    betti_before: BettiVector
    betti_after: BettiVector
    delta_plus: int
    delta_minus: int
    passed: bool
    members: int = 1
    grid: dict = field(default_factory=dict)
    exact: tuple | None = None
    grid_agrees: bool | None = None
    note: str = ""


@dataclass(frozen=True)
class _Event:
    radius: float
    index: int
    delta: int
    members: tuple


def filtration_events(crits) -> list[_Event]:
    """Critical points grouped by level.

    Only the zero-radius minima of ``k = 1`` share a level; they become one
    event whose budget is the number of data points.
    """
    crits = sorted(crits, key=CriticalPoint.sort_key)
    zero = tuple(cp for cp in crits if cp.n_boundary == 1)
    rest = [cp for cp in crits if cp.n_boundary != 1]
    events = []
    if zero:
        events.append(_Event(0.0, 0, sum(cp.delta for cp in zero), zero))
    events.extend(_Event(cp.radius, cp.index, cp.delta, (cp,)) for cp in rest)
    return events


def attribute(before: BettiVector, after: BettiVector, index: int, delta: int):
    """Split the change across a critical value into births and deaths.

    Returns ``(delta_plus, delta_minus, passed)``.
    """
    dims = range(0, 3)
    unchanged = all(before[i] == after[i] for i in dims if i not in (index, index - 1))
    plus = after[index] - before[index]
    minus = before[index - 1] - after[index - 1] if index >= 1 else 0
    ok = unchanged and plus >= 0 and minus >= 0 and plus + minus == delta
    return plus, minus, ok


def _epsilons(events, epsilon):
    radii = [ev.radius for ev in events]
    out = []
    for a, ev in enumerate(events):
        if epsilon is not None:
            out.append(float(epsilon))
            continue
        gaps = []
        if a > 0:
            gaps.append(radii[a] - radii[a - 1])
        if a + 1 < len(radii):
            gaps.append(radii[a + 1] - radii[a])
        if gaps:
            out.append(0.4 * min(gaps))
        else:
            out.append(0.4 * ev.radius if ev.radius > 0 else 1.0)
    return out


def report_bounds(P: PointCloud, reach: float):
    """Square box around the data, padded so every disk of radius ``reach`` fits."""
    pts = P.points
    mid = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    half = 0.5 * float(np.max(pts.max(axis=0) - pts.min(axis=0))) + 1.05 * reach + 1e-9
    return mid - half, mid + half


def homology_change_report(
    P: PointCloud,
    k: int,
    crits,
    epsilon: float | None = None,
    resolution: int = 512,
    resolve_factor: float = 4.0,
    use_exact: bool = True,
) -> list[FiltrationRecord]:
    """Check the predicted homology change at every critical value.

    Parameters
    ----------
    P : PointCloud
        Planar data.
    crits : list of CriticalPoint
        A complete enumeration for ``(P, k)``.
    epsilon : float, optional
        Half-width of the window around each critical value. By default 0.4
        times the gap to the nearest other critical value.
    resolution : int
        Coarse grid size ``R``; the grid is also evaluated at ``2R``.
    resolve_factor : float
        The grid is trusted only where ``epsilon >= resolve_factor * cell``.
    use_exact : bool
        Also run the boundary-tracing oracle; required for values the grid
        cannot resolve.

    Raises
    ------
    UnstableGrid
        If a resolvable record gets different Betti numbers at ``R`` and ``2R``.
        The exception carries all records.
    """
    if P.dim != 2:
        raise ValueError("the homology report is planar only")
    if resolution < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution {resolution} is below {MIN_RESOLUTION}")
    events = filtration_events(crits)
    if not events:
        return []
    eps = _epsilons(events, epsilon)
    reach = max(ev.radius + e for ev, e in zip(events, eps))
    lo, hi = report_bounds(P, reach)
    side = float(hi[0] - lo[0])
    resolutions = (resolution, 2 * resolution)
    grids: dict[int, GridField] = {}

    def grid(res):
        if res not in grids:
            grids[res] = sample_grid(P, k, (lo, hi), res)
        return grids[res]

    records, unstable = [], []
    for ev, e in zip(events, eps):
        r_lo, r_hi = ev.radius - e, ev.radius + e
        resolved = e >= resolve_factor * side / resolution
        grid_betti = {}
        if resolved:
            for res in resolutions:
                g = grid(res)
                grid_betti[res] = (betti_sublevel(g, r_lo), betti_sublevel(g, r_hi))
        exact = None
        note = ""
        if use_exact or not resolved:
            try:
                exact = (BettiVector(kfold_betti_exact(P.points, k, r_lo)),
                         BettiVector(kfold_betti_exact(P.points, k, r_hi)))
            except DegenerateArrangement as err:
                note = f"exact oracle unavailable: {err}"
        stable = True
        if resolved:
            stable = grid_betti[resolutions[0]] == grid_betti[resolutions[1]]
        if exact is not None:
            before, after = exact
            oracle = "exact"
        elif resolved:
            before, after = grid_betti[resolutions[0]]
            oracle = "grid"
        else:
            before = after = BettiVector(())
            oracle = "none"
        plus, minus, ok = attribute(before, after, ev.index, ev.delta)
        grid_agrees = None
        if resolved and stable:
            grid_agrees = grid_betti[resolutions[0]] == (before, after)
        if oracle == "none":
            ok = False
        if not stable:
            ok = False
            note = "grid resolutions disagree"
        elif grid_agrees is False:
            note = "grid differs from the exact oracle"
        first = ev.members[0]
        rec = FiltrationRecord(
            radius=ev.radius,
            index=ev.index,
            delta=ev.delta,
            n_boundary=first.n_boundary,
            boundary=tuple(lab for cp in ev.members for lab in cp.boundary),
            interior=first.interior,
            epsilon=e,
            resolutions=resolutions if resolved else (),
            oracle=oracle,
            betti_before=before,
            betti_after=after,
            delta_plus=plus,
            delta_minus=minus,
            passed=ok,
            members=len(ev.members),
            grid={res: (b.padded(2), a.padded(2)) for res, (b, a) in grid_betti.items()},
            exact=None if exact is None else (exact[0].padded(2), exact[1].padded(2)),
            grid_agrees=grid_agrees,
            note=note,
        )
        records.append(rec)
        if not stable:
            unstable.append(rec)
    if unstable:
        raise UnstableGrid(
            f"{len(unstable)} critical value(s) got different Betti numbers at resolutions {resolutions}",
            records,
        )
    return records


def total_change(records) -> tuple:
    """Net change of ``(b_0, b_1)`` summed over all records."""
    d0 = d1 = 0
    for rec in records:
        d0 += rec.betti_after[0] - rec.betti_before[0]
        d1 += rec.betti_after[1] - rec.betti_before[1]
    return d0, d1


def interval_bettis(P: PointCloud, k: int, crits, samples: int = 3, resolution: int = 512):
    """Betti numbers at ``samples`` radii strictly inside each gap between levels.

    Uses the exact oracle. Returns a list with one tuple of BettiVectors per gap.
    """
    levels = sorted({ev.radius for ev in filtration_events(crits)})
    out = []
    for a, b in zip(levels[:-1], levels[1:]):
        rs = a + (b - a) * (np.arange(1, samples + 1) / (samples + 1))
        out.append(tuple(BettiVector(kfold_betti_exact(P.points, k, float(r))) for r in rs))
    return out


__all__ = [
    "GridField",
    "FiltrationRecord",
    "sample_grid",
    "betti_sublevel",
    "betti_covered",
    "homology_change_report",
    "filtration_events",
    "attribute",
    "total_change",
    "interval_bettis",
    "report_bounds",
    "cell_centers",
    "MIN_RESOLUTION",
]

