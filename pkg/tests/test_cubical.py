import numpy as np
import pytest

from knn_morse import constructions as cons
from knn_morse import cubical
from knn_morse.critical import enumerate_critical_points
from knn_morse.cubical import (
    attribute,
    betti_covered,
    betti_sublevel,
    filtration_events,
    homology_change_report,
    interval_bettis,
    sample_grid,
    total_change,
)
from knn_morse.errors import ResolutionTooLow, UnstableGrid
from knn_morse.geometry import PointCloud
from knn_morse.knn import knn_distance
from knn_morse.simplicial import BettiVector


def test_pair_midpoint_cell():
    P = PointCloud([[-1.0, 0.0], [1.0, 0.0]])
    g = sample_grid(P, 2, ([-2, -2], [2, 2]), 64)
    # cells (31, 31) .. (32, 32) straddle the midpoint
    assert g.values[31:33, 31:33].min() == pytest.approx(1.0, abs=0.05)
    assert g.values.min() >= 1.0


def test_grid_min_bounded_by_data_values(rng):
    pts = rng.random((10, 2))
    P = PointCloud(pts)
    g = sample_grid(P, 3, ([-0.5, -0.5], [1.5, 1.5]), 128)
    at_data = min(knn_distance(P, 3, p).value for p in pts)
    assert 0 <= g.values.min() <= at_data + np.sqrt(2) * 2 / 128


def test_grid_spot_checks(rng):
    P = PointCloud(rng.random((10, 2)))
    g = sample_grid(P, 2, ([0, 0], [1, 1]), 100)
    for _ in range(50):
        i, j = rng.integers(100, size=2)
        assert g.values[i, j] == knn_distance(P, 2, g.center(i, j)).value


def test_grid_is_deterministic(rng):
    P = PointCloud(rng.random((10, 2)))
    a = sample_grid(P, 2, ([0, 0], [1, 1]), 80).values
    b = sample_grid(P, 2, ([0, 0], [1, 1]), 80).values
    assert np.array_equal(a, b)


def test_resolution_too_low():
    P = PointCloud([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ResolutionTooLow):
        sample_grid(P, 1, ([0, 0], [1, 1]), 32)


def test_sublevel_extremes(rng):
    P = PointCloud(rng.random((6, 2)))
    g = sample_grid(P, 2, ([0, 0], [1, 1]), 64)
    assert betti_sublevel(g, -1.0) == BettiVector((0, 0))
    assert betti_sublevel(g, 10.0) == BettiVector((1, 0))


def test_sublevel_equilateral_hole():
    P = PointCloud(cons.equilateral_triple(1.0))
    g = sample_grid(P, 1, ([-1, -1], [2, 2]), 512)
    assert betti_sublevel(g, 0.55) == BettiVector((1, 1))
    assert betti_sublevel(g, 0.45) == BettiVector((3,))


def test_betti_covered_small_masks():
    ring = np.ones((5, 5), dtype=bool)
    ring[2, 2] = False
    assert betti_covered(ring) == BettiVector((1, 1))
    diag = np.eye(4, dtype=bool)
    # 4-connectivity: diagonal neighbours are separate components
    assert betti_covered(diag) == BettiVector((4,))
    assert betti_covered(np.zeros((3, 3), dtype=bool)) == BettiVector(())


def test_monotone_coverage(rng):
    P = PointCloud(rng.random((12, 2)))
    g = sample_grid(P, 2, ([-0.2, -0.2], [1.2, 1.2]), 96)
    prev = np.zeros_like(g.values, dtype=bool)
    for r in np.linspace(0, 0.8, 30):
        cur = g.values <= r
        assert not np.any(prev & ~cur)
        prev = cur


def test_attribute_rules():
    b = BettiVector
    assert attribute(b((2, 0)), b((1, 1)), 1, 2) == (1, 1, True)
    assert attribute(b(()), b((1,)), 0, 1) == (1, 0, True)
    assert attribute(b((1, 1)), b((1,)), 2, 1) == (0, 1, True)
    # a change outside dimensions {index, index - 1} fails
    assert not attribute(b((2, 0)), b((1, 0)), 2, 1)[2]
    # budget mismatch fails
    assert not attribute(b((2, 0)), b((1, 0)), 1, 2)[2]


def test_pair_report():
    pts, k, _ = cons.pair_birth()
    P = PointCloud(pts)
    (rec,) = homology_change_report(P, k, enumerate_critical_points(P, k))
    assert rec.index == 0 and rec.passed
    assert rec.betti_before == BettiVector(()) and rec.betti_after == BettiVector((1,))
    assert rec.delta_plus == 1 and rec.delta_minus == 0


def test_merge_and_loop_record():
    pts, k, support = cons.merge_and_loop()
    P = PointCloud(pts)
    records = homology_change_report(P, k, enumerate_critical_points(P, k))
    assert all(r.passed for r in records)
    (rec,) = [r for r in records if r.boundary == support]
    assert (rec.n_boundary, rec.index, rec.delta) == (3, 1, 2)
    assert (rec.delta_plus, rec.delta_minus) == (1, 1)
    assert rec.resolutions == (512, 1024)
    assert rec.grid[512] == rec.grid[1024] == ((2, 0), (1, 1))
    assert rec.grid_agrees


def test_random_clouds_pass_and_balance():
    rng = np.random.default_rng(5)
    for _ in range(2):
        P = PointCloud(rng.random((25, 2)))
        for k in (1, 2, 3):
            crits = enumerate_critical_points(P, k, warn=False)
            records = homology_change_report(P, k, crits)
            assert all(r.passed for r in records)
            assert total_change(records) == (1, 0)
            for r in records:
                if r.index == 0:
                    assert r.delta_minus == 0 and r.betti_after[1] == r.betti_before[1]
                if r.index == 2:
                    assert r.delta == 1 and r.delta_plus == 0
                    assert r.betti_before[1] - r.betti_after[1] == 1


def test_constant_between_levels():
    rng = np.random.default_rng(6)
    P = PointCloud(rng.random((15, 2)))
    for k in (1, 2):
        crits = enumerate_critical_points(P, k, warn=False)
        for triple in interval_bettis(P, k, crits):
            assert len(set(triple)) == 1


def test_zero_radius_minima_grouped():
    pts = np.random.default_rng(2).random((7, 2))
    P = PointCloud(pts)
    crits = enumerate_critical_points(P, 1)
    events = filtration_events(crits)
    assert events[0].radius == 0.0 and events[0].delta == 7 and len(events[0].members) == 7
    rec = homology_change_report(P, 1, crits)[0]
    assert rec.members == 7 and rec.betti_after == BettiVector((7,)) and rec.passed


def test_fixed_epsilon_is_used():
    pts, k, _ = cons.pair_birth()
    P = PointCloud(pts)
    (rec,) = homology_change_report(P, k, enumerate_critical_points(P, k), epsilon=0.1)
    assert rec.epsilon == 0.1


def test_unstable_grid_is_raised(monkeypatch):
    pts, k, _ = cons.pair_birth()
    P = PointCloud(pts)
    real = cubical.betti_sublevel

    def flaky(grid, r):
        b = real(grid, r)
        return BettiVector((b[0] + 1,)) if grid.resolution == 128 else b

    monkeypatch.setattr(cubical, "betti_sublevel", flaky)
    with pytest.raises(UnstableGrid) as info:
        homology_change_report(P, k, enumerate_critical_points(P, k), resolution=64)
    (rec,) = info.value.records
    assert not rec.passed and rec.note


def test_grid_only_mode():
    pts, k, _ = cons.pair_birth()
    P = PointCloud(pts)
    (rec,) = homology_change_report(P, k, enumerate_critical_points(P, k), use_exact=False)
    assert rec.oracle == "grid" and rec.exact is None and rec.passed


def test_report_needs_planar_input():
    with pytest.raises(ValueError):
        homology_change_report(PointCloud([0.0, 1.0]), 1, [])
