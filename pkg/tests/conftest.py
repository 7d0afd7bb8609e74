import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from knn_morse.geometry import PointCloud

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def random_cloud(rng, n, d=2):
    return PointCloud(rng.random((n, d)))


def naive_circumcenter(X):
    """Circumcenter in aff(X) from the normal equations, solved by lstsq.

    Independent of the package's SVD and Gram routes.
    """
    X = np.asarray(X, dtype=float)
    if len(X) == 1:
        return X[0].copy(), 0.0
    A = X[1:] - X[0]
    # c = X[0] + A^T t  with  A A^T t = |a_i|^2 / 2
    G = A @ A.T
    t = np.linalg.lstsq(G, 0.5 * np.sum(A * A, axis=1), rcond=None)[0]
    c = X[0] + A.T @ t
    return c, float(np.sqrt(np.sum((c - X[0]) ** 2)))


def naive_weights(c, X):
    """Affine weights of c w.r.t. X by least squares on the augmented system."""
    X = np.asarray(X, dtype=float)
    M = np.vstack([X.T, np.ones(len(X))])
    rhs = np.append(c, 1.0)
    return np.linalg.lstsq(M, rhs, rcond=None)[0]


def brute_force_critical(P: PointCloud, k: int, tol_in=1e-9):
    """Critical points by the definition, over every subset, without pruning.

    Returns a sorted list of (boundary labels, interior labels, index, radius).
    """
    pts = P.points
    n, d = pts.shape
    out = []
    for m in range(1 if k == 1 else 2, min(d + 1, n) + 1):
        for X in itertools.combinations(range(n), m):
            sub = pts[list(X)]
            if m > 1 and np.linalg.matrix_rank(sub[1:] - sub[0], tol=1e-10) < m - 1:
                continue
            c, rho = naive_circumcenter(sub)
            w = naive_weights(c, sub)
            if m > 1 and not np.all(w > 1e-10):
                continue
            dist = np.sqrt(np.sum((pts - c) ** 2, axis=1))
            others = np.setdiff1d(np.arange(n), X)
            inner = others[dist[others] < rho - tol_in]
            j = len(inner)
            mu = m + j - k
            if j <= k - 1 and 0 <= mu <= d:
                out.append((tuple(X), tuple(int(v) for v in inner), mu, rho))
    out.sort(key=lambda t: (t[3], t[0]))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
