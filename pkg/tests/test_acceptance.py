"""Acceptance checks, one test per criterion.

Each test records a one-line verdict (printed in the terminal summary) before
asserting, so a failing criterion still reports what it measured. Wall-clock
limits are part of the verdict.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.spatial import Delaunay

from knn_morse import constructions as cons
from knn_morse.critical import (
    classify,
    clarke_check,
    enumerate_critical_points,
    euler_sum,
    validate_morse,
    zero_in_generalized_gradient,
)
from knn_morse.cubical import attribute, homology_change_report, total_change
from knn_morse.errors import GeneralPositionViolation, UnstableGrid
from knn_morse.geometry import PointCloud, circumsphere
from knn_morse.io import dumps, estimate_to_dict
from knn_morse.knn import knn_distance, minmax_eval
from knn_morse.poisson import PoissonRunConfig, run_trials
from knn_morse.simplicial import BettiVector, auxiliary_complex_from_data, betti_gf2, skeleton_complex

from conftest import ACCEPTANCE_LINES


def verdict(number, title, ok, detail, elapsed, limit):
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    ACCEPTANCE_LINES[number] = (
        f"[{number:2d}] {status}  {title}: {detail} ({elapsed:.2f} s, "
        + (f"limit {limit:g} s)" if math.isfinite(limit) else "no time limit)")
    )
    assert ok, ACCEPTANCE_LINES[number]
    assert within, ACCEPTANCE_LINES[number]


# -- 1 ---------------------------------------------------------------------------

def test_index_panel_configurations():
    t0 = time.perf_counter()
    expected = [(0, 2, 0), (1, 2, 1), (1, 3, 0), (2, 3, 1)]
    got = []
    for pts, k, support in cons.index_panels():
        P = PointCloud(pts)
        crits = [cp for cp in enumerate_critical_points(P, k, warn=False) if cp.boundary == support]
        got.append(tuple((cp.index, cp.n_boundary, cp.n_interior) for cp in crits))
    ok = got == [(e,) for e in expected]
    detail = "(index, boundary, interior) = " + ", ".join(str(g[0]) if g else "missing" for g in got)
    verdict(1, "four index configurations, k=2", ok, detail, time.perf_counter() - t0, 1.0)


# -- 2 ---------------------------------------------------------------------------

def test_merge_and_loop_grid_split():
    t0 = time.perf_counter()
    pts, k, support = cons.merge_and_loop()
    P = PointCloud(pts)
    crits = enumerate_critical_points(P, k)
    try:
        records = homology_change_report(P, k, crits, resolution=512)
    except UnstableGrid as err:
        records = err.records
    (rec,) = [r for r in records if r.boundary == support]
    grids = rec.grid
    agree = 512 in grids and 1024 in grids and grids[512] == grids[1024]
    if agree:
        before, after = (BettiVector(v) for v in grids[512])
        plus, minus, grid_ok = attribute(before, after, rec.index, rec.delta)
    else:
        plus = minus = None
        grid_ok = False
    ok = (rec.n_boundary, rec.index, rec.delta) == (3, 1, 2) and agree and grid_ok and (plus, minus) == (1, 1)
    detail = (f"boundary 3, index {rec.index}, budget {rec.delta}; grid 512/1024 "
              f"{'agree' if agree else 'disagree'}: {grids.get(512)} -> births {plus}, deaths {minus}")
    verdict(2, "budget 2 split into one merge and one loop", ok, detail, time.perf_counter() - t0, 30.0)


# -- 3 ---------------------------------------------------------------------------

def _morse_cloud(rng, n, ks):
    """Draw until the cloud is Morse for every k; returns (cloud, crits by k, redraws)."""
    redraws = 0
    while True:
        P = PointCloud(rng.random((n, 2)))
        try:
            crits = {k: enumerate_critical_points(P, k, warn=False) for k in ks}
        except GeneralPositionViolation:
            redraws += 1
            continue
        if all(v.distinct_values and v.nondegenerate for v in (validate_morse(c, P) for c in crits.values())):
            return P, crits, redraws
        redraws += 1


def test_homology_change_on_random_clouds():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20261016)
    failures, records_seen, redraws, unstable, grid_checked = [], 0, 0, 0, 0
    for cloud in range(20):
        P, crits, extra = _morse_cloud(rng, 25, (1, 2, 3))
        redraws += extra
        for k, cps in crits.items():
            try:
                records = homology_change_report(P, k, cps)
            except UnstableGrid as err:
                records = err.records
                unstable += 1
            records_seen += len(records)
            grid_checked += sum(r.grid_agrees is not None for r in records)
            bad = [r for r in records if not r.passed or r.delta_plus + r.delta_minus != r.delta]
            if bad or total_change(records) != (1, 0):
                failures.append((cloud, k, len(bad)))
    ok = not failures and unstable == 0
    detail = (f"20 clouds x k in {{1,2,3}}, {records_seen} critical values, {len(failures)} failing runs, "
              f"{unstable} unstable grids, {grid_checked} grid-resolved, {redraws} non-Morse redraws")
    verdict(3, "predicted homology change at every critical value", ok, detail,
            time.perf_counter() - t0, 600.0)


# -- 4 ---------------------------------------------------------------------------

def test_alternating_budget_sum():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    bad, runs = [], 0
    for trial in range(100):
        n = int(rng.integers(5, 41))
        P = PointCloud(rng.random((n, 2)))
        for k in range(1, 5):
            if k > n:
                continue
            runs += 1
            s = euler_sum(enumerate_critical_points(P, k, warn=False))
            if s != 1:
                bad.append((trial, k, s))
    fixtures = [(pts, k) for pts, k, _ in cons.index_panels()]
    fixtures += [(cons.merge_and_loop()[0], k) for k in (1, 2, 3)]
    fixtures += [(cons.obtuse_triangle(), k) for k in (1, 2, 3)]
    fixtures += [(cons.equilateral_triple(), k) for k in (1, 2, 3)]
    for pts, k in fixtures:
        runs += 1
        s = euler_sum(enumerate_critical_points(PointCloud(pts), k, warn=False))
        if s != 1:
            bad.append(("fixture", k, s))
    verdict(4, "alternating sum of budgets equals 1", not bad,
            f"{runs} enumerations (100 clouds x k=1..4 plus {len(fixtures)} fixtures), {len(bad)} mismatches",
            time.perf_counter() - t0, 60.0)


# -- 5 ---------------------------------------------------------------------------

def test_skeleton_betti_closed_form():
    t0 = time.perf_counter()
    cases = bad = 0
    for n in range(2, 7):
        for mu in range(1, n):
            cases += 1
            b = betti_gf2(skeleton_complex(n, mu - 1))
            if mu == 1:
                expected = BettiVector((math.comb(n - 1, 1) + 1,))
            else:
                expected = BettiVector(tuple(
                    1 if q == 0 else (math.comb(n - 1, mu) if q == mu - 1 else 0) for q in range(mu)
                ))
            bad += b != expected
    verdict(5, "GF(2) Betti numbers of simplex skeleta", bad == 0,
            f"{cases} (size, index) pairs, {bad} mismatches", time.perf_counter() - t0, 1.0)


# -- 6 ---------------------------------------------------------------------------

def test_auxiliary_complex_from_data():
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    checked = bad = 0
    for _ in range(10):
        P = PointCloud(rng.random((20, 2)))
        for k in (1, 2, 3):
            for cp in enumerate_critical_points(P, k, warn=False):
                aux = auxiliary_complex_from_data(cp, P, k)
                expected = skeleton_complex(cp.n_boundary, cp.index - 1)
                checked += 1
                bad += aux.complex.simplices != expected.simplices
    verdict(6, "auxiliary complex equals the predicted skeleton", bad == 0,
            f"{checked} critical points on 10 clouds, k<=3, {bad} mismatches", time.perf_counter() - t0, 60.0)


# -- 7 ---------------------------------------------------------------------------

def _delaunay_rule(P):
    """Critical points of the plain distance function from the Delaunay triangulation.

    Vertices are minima; an edge is a saddle when its diametral disk is empty;
    a triangle is a maximum when it contains its circumcenter.
    """
    pts = P.points
    tri = Delaunay(pts)
    out = {((i,), 0) for i in range(len(pts))}
    edges = {tuple(sorted(e)) for s in tri.simplices for e in itertools.combinations(s, 2)}
    for a, b in edges:
        mid = 0.5 * (pts[a] + pts[b])
        r = 0.5 * np.linalg.norm(pts[a] - pts[b])
        if np.all(np.linalg.norm(pts - mid, axis=1) >= r - 1e-12):
            out.add(((int(a), int(b)), 1))
    for s in tri.simplices:
        X = pts[s]
        c = circumsphere(X).center
        w = np.linalg.solve(np.vstack([X.T, np.ones(3)]), np.append(c, 1.0))
        if np.all(w > 0):
            out.add((tuple(sorted(int(v) for v in s)), 2))
    return out


def test_distance_function_rule_and_clarke():
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    rule_bad = 0
    for _ in range(20):
        P = PointCloud(rng.random((40, 2)))
        got = {(cp.boundary, cp.index) for cp in enumerate_critical_points(P, 1, warn=False)}
        rule_bad += got != _delaunay_rule(P)
    tested = disagree = critical = 0
    while tested < 10_000:
        P = PointCloud(rng.random((12, 2)))
        k = int(rng.integers(1, 5))
        m = int(rng.integers(2, 4))
        X = tuple(sorted(rng.choice(12, m, replace=False).tolist()))
        try:
            cp = classify(X, P, k)
        except GeneralPositionViolation:
            continue
        c = circumsphere(P.coords(X)).center
        via_clarke = clarke_check(cp, P, k) if cp is not None else zero_in_generalized_gradient(P, k, c)
        disagree += via_clarke != (cp is not None)
        critical += cp is not None
        tested += 1
    ok = rule_bad == 0 and disagree == 0
    verdict(7, "k=1 matches the distance-function rule; generalized gradient agrees", ok,
            f"20 clouds, {rule_bad} rule mismatches; {tested} candidates ({critical} critical), "
            f"{disagree} disagreements", time.perf_counter() - t0, 60.0)


# -- 8 ---------------------------------------------------------------------------

def test_minmax_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        d = int(rng.integers(1, 4))
        P = PointCloud(rng.normal(size=(n, d)))
        k = int(rng.integers(1, n + 1))
        x = rng.normal(size=d) * 2
        worst = max(worst, abs(minmax_eval(P, k, x) - knn_distance(P, k, x).value))
    verdict(8, "min over k-subsets of the max distance equals the k-NN distance", worst < 1e-12,
            f"1000 pairs, |P|<=10, max difference {worst:.3g}", time.perf_counter() - t0, 10.0)


# -- 9, 10, 11 -------------------------------------------------------------------

LINE_CONFIG = PoissonRunConfig(1, 2, (50, 100, 200), ((0.0,), (1.0,)), trials=2000, seed=20261016)
PLANE_CONFIG = PoissonRunConfig(2, 2, (50, 100, 200, 400), ((0.0, 0.0), (1.0, 1.0)), trials=500, seed=20261016)

_reports: dict = {}


def _report(config):
    t0 = time.perf_counter()
    est = run_trials(config)
    return est, dumps(estimate_to_dict(est)), time.perf_counter() - t0


def test_line_counts_per_unit_intensity():
    est, text, elapsed = _report(LINE_CONFIG)
    _reports["line"] = text
    parts, ok = [], True
    for a, nu in enumerate(est.nus):
        for i in (0, 1):
            ratio, se = est.ratio(a, i)
            z = (ratio - 1.0) / se
            ok &= abs(z) <= 3.0
            parts.append(f"nu={nu:g} i={i}: {ratio:.4f}+-{se:.4f} (z={z:+.2f})")
    verdict(9, "line, k=2: mean counts per unit intensity equal 1", ok, "; ".join(parts), elapsed, 120.0)


def test_plane_counts_are_linear():
    est, text, elapsed = _report(PLANE_CONFIG)
    _reports["plane"] = text
    parts, ok = [], True
    for i, reg in est.regression.items():
        z = reg.intercept / reg.intercept_se
        ok &= reg.r2 >= 0.99 and abs(z) <= 3.0
        parts.append(f"i={i}: slope {reg.slope:.4f}, R2 {reg.r2:.5f}, intercept {reg.intercept:+.3f} (z={z:+.2f})")
    verdict(10, "plane, k=2: mean counts linear in intensity", ok, "; ".join(parts), elapsed, 900.0)


def test_reports_are_reproducible():
    t0 = time.perf_counter()
    if set(_reports) != {"line", "plane"}:
        pytest.skip("needs the two Poisson criteria to have run first")
    same_line = _report(LINE_CONFIG)[1] == _reports["line"]
    same_plane = _report(PLANE_CONFIG)[1] == _reports["plane"]
    verdict(11, "same seed gives byte-identical Poisson reports", same_line and same_plane,
            f"line {'identical' if same_line else 'differs'}, plane {'identical' if same_plane else 'differs'}",
            time.perf_counter() - t0, math.inf)
