"""Monte-Carlo counts of critical points of Poisson samples.

Each trial draws a homogeneous Poisson sample on the window dilated by a
buffer, enumerates the critical points of the k-NN distance whose centers
fall in the window, and tallies them by index. Averaging over trials and
regressing the mean counts on the intensity tests that they grow linearly.
"""

from __future__ import annotations

import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .critical import enumerate_critical_points
from .errors import TooIntense
from .geometry import PointCloud, Tolerances

MAX_EXPECTED_POINTS = 10**7

# Random samples are in general position almost surely, but with millions of
# candidate spheres per run a third point does land within 1e-9 of one now
# and then (seen at 1.3e-10). The distance comparison itself is accurate to
# about 1e-16 there, so sampled data use a much narrower on-sphere band.
SAMPLE_TOL = Tolerances(sphere=1e-13)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def auto_buffer(d: int, k: int, nu: float) -> float:
    """Three times the radius of a ball expected to hold ``k`` points."""
    return 3.0 * (k / (unit_ball_volume(d) * nu)) ** (1.0 / d)


@dataclass(frozen=True)
class PoissonRunConfig:
    """Settings of a Monte-Carlo run.

    ``buffer=None`` selects :func:`auto_buffer` separately for each intensity.
    """

    dim: int
    k: int
    intensities: tuple
    window: tuple
    trials: int = 30
    seed: int = 0
    buffer: float | None = None

    def __post_init__(self):
        nus = tuple(float(v) for v in self.intensities)
        lo, hi = (tuple(float(v) for v in np.asarray(w, dtype=float).reshape(self.dim)) for w in self.window)
        object.__setattr__(self, "intensities", nus)
        object.__setattr__(self, "window", (lo, hi))
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not nus or any(v <= 0 for v in nus):
            raise ValueError("intensities must be positive")
        if any(b <= a for a, b in zip(nus, nus[1:])):
            raise ValueError("intensities must be strictly increasing")
        if self.trials < 30:
            raise ValueError("at least 30 trials per intensity are required")
        if self.buffer is not None and self.buffer < 0:
            raise ValueError("buffer must be nonnegative")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("window must have positive extent")

    @property
    def window_volume(self) -> float:
        lo, hi = self.window
        return float(np.prod(np.subtract(hi, lo)))

    def buffer_for(self, nu: float) -> float:
        return auto_buffer(self.dim, self.k, nu) if self.buffer is None else float(self.buffer)

    def sample_box(self, nu: float):
        b = self.buffer_for(nu)
        lo, hi = self.window
        return tuple(v - b for v in lo), tuple(v + b for v in hi)


def trial_seed(base_seed: int, nu: float, trial: int) -> np.random.SeedSequence:
    """Seed of trial ``trial`` at intensity ``nu``, independent of run order."""
    key = zlib.crc32(repr(float(nu)).encode())
    return np.random.SeedSequence([int(base_seed), key, int(trial)])


def sample_poisson(nu: float, box, seed) -> PointCloud:
    """Homogeneous Poisson sample of intensity ``nu`` in an axis-aligned box.

    Raises
    ------
    TooIntense
        If the expected number of points exceeds 10^7.
    """
    lo, hi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in box)
    mean = float(nu) * float(np.prod(hi - lo))
    if mean > MAX_EXPECTED_POINTS:
        raise TooIntense(f"expected {mean:.3g} points, limit is {MAX_EXPECTED_POINTS}")
    rng = np.random.default_rng(seed)
    n = int(rng.poisson(mean))
    pts = lo + (hi - lo) * rng.random((n, len(lo)))
    return PointCloud(pts, dim=len(lo))


@dataclass(frozen=True)
class IndexCounts:
    """Critical points in a window, by index and by ``(boundary, interior)`` size."""

    by_index: tuple
    by_support: dict = field(default_factory=dict)


def count_by_index(P: PointCloud, k: int, window, tol: Tolerances = SAMPLE_TOL) -> IndexCounts:
    """Count critical points with center in ``window`` by their index.

    All points of ``P`` take part, including those outside the window. A
    sample with fewer than ``k`` points has no critical points.
    """
    d = P.dim
    counts = [0] * (d + 1)
    support: dict = {}
    if len(P) >= k:
        for cp in enumerate_critical_points(P, k, window=window, tol=tol, warn=False):
            counts[cp.index] += 1
            key = (cp.n_boundary, cp.n_interior)
            support[key] = support.get(key, 0) + 1
    return IndexCounts(tuple(counts), dict(sorted(support.items())))


@dataclass(frozen=True)
class Regression:
    """Least-squares line ``mean = intercept + slope * nu`` for one index."""

    slope: float
    intercept: float
    r2: float
    slope_se: float
    intercept_se: float


@dataclass
class PoissonEstimate:
    """Aggregated counts of one run.

    ``means[a, i]`` and ``stderr[a, i]`` refer to intensity ``nus[a]`` and
    index ``i``. ``regression`` is empty when only one intensity was run.
    ``support_means`` maps ``(boundary size, interior size)`` to the mean count
    per intensity.
    """

    config: PoissonRunConfig
    nus: tuple
    means: np.ndarray
    stderr: np.ndarray
    mean_points: tuple
    regression: dict = field(default_factory=dict)
    support_means: dict = field(default_factory=dict)

    def ratio(self, a: int, i: int) -> tuple[float, float]:
        """``mean / (nu * |window|)`` and its standard error."""
        scale = self.nus[a] * self.config.window_volume
        return float(self.means[a, i] / scale), float(self.stderr[a, i] / scale)


def fit_line(x, y, se) -> Regression | None:
    """Ordinary least squares with the mean errors carried through.

    The fitted coefficients are linear in ``y``; their standard errors follow
    from the per-point standard errors ``se`` assuming independence.
    """
    x, y, se = (np.asarray(v, dtype=float) for v in (x, y, se))
    if len(x) < 2:
        return None
    xc = x - x.mean()
    sxx = float(xc @ xc)
    w_slope = xc / sxx
    w_int = 1.0 / len(x) - x.mean() * w_slope
    slope = float(w_slope @ y)
    intercept = float(w_int @ y)
    resid = y - (intercept + slope * x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else math.nan
    return Regression(
        slope=slope,
        intercept=intercept,
        r2=r2,
        slope_se=float(math.sqrt((w_slope ** 2) @ (se ** 2))),
        intercept_se=float(math.sqrt((w_int ** 2) @ (se ** 2))),
    )


def worker_count(requested: int | None = None) -> int:
    """Worker processes to use; ``KNN_MORSE_THREADS`` caps it, 0 means all cores."""
    if requested is None:
        raw = os.environ.get("KNN_MORSE_THREADS", "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError as err:
            raise ValueError(f"KNN_MORSE_THREADS must be an integer, got {raw!r}") from err
    if requested < 0:
        raise ValueError("worker count must be nonnegative")
    return requested if requested > 0 else (os.cpu_count() or 1)


def _run_block(config: PoissonRunConfig, nu: float, trials: range):
    out = []
    box = config.sample_box(nu)
    for t in trials:
        P = sample_poisson(nu, box, trial_seed(config.seed, nu, t))
        out.append((len(P), count_by_index(P, config.k, config.window)))
    return out


def run_trials(config: PoissonRunConfig, workers: int | None = None) -> PoissonEstimate:
    """Run every ``(nu, trial)`` job and aggregate the counts.

    Results are reduced in ``(nu, trial)`` order, so the estimate does not
    depend on the number of workers.
    """
    workers = worker_count(workers)
    d = config.dim
    blocks = []
    step = max(1, math.ceil(config.trials / (4 * workers)))
    for nu in config.intensities:
        for s in range(0, config.trials, step):
            blocks.append((nu, range(s, min(config.trials, s + step))))
    if workers == 1:
        results = [_run_block(config, nu, tr) for nu, tr in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, config, nu, tr) for nu, tr in blocks]
            results = [f.result() for f in futures]
    per_nu: dict[float, list] = {nu: [] for nu in config.intensities}
    for (nu, _), res in zip(blocks, results):
        per_nu[nu].extend(res)

    nus = config.intensities
    means = np.zeros((len(nus), d + 1))
    stderr = np.zeros((len(nus), d + 1))
    mean_points = []
    support_keys = sorted({key for rows in per_nu.values() for _, c in rows for key in c.by_support})
    support_means = {key: [] for key in support_keys}
    for a, nu in enumerate(nus):
        rows = per_nu[nu]
        counts = np.array([c.by_index for _, c in rows], dtype=float)
        means[a] = counts.mean(axis=0)
        stderr[a] = counts.std(axis=0, ddof=1) / math.sqrt(len(rows))
        mean_points.append(float(np.mean([n for n, _ in rows])))
        for key in support_keys:
            support_means[key].append(float(np.mean([c.by_support.get(key, 0) for _, c in rows])))
    regression = {}
    if len(nus) >= 2:
        for i in range(d + 1):
            regression[i] = fit_line(nus, means[:, i], stderr[:, i])
    return PoissonEstimate(
        config=config,
        nus=nus,
        means=means,
        stderr=stderr,
        mean_points=tuple(mean_points),
        regression=regression,
        support_means={key: tuple(v) for key, v in support_means.items()},
    )
