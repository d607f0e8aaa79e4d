"""Shared test fixtures and independent reference implementations.

The kernel builders here are deliberate double loops over explicit
formulas, kept separate from the production blockwise code so tests
compare two routes to the same numbers.
"""

import math

import numpy as np

from selectkit import TokenStatsSequence


def reference_rbf_kernel(X, gamma):
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    W = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            diff = X[i] - X[j]
            W[i, j] = math.exp(-float(np.dot(diff, diff)) / gamma)
    return W


def reference_cosine_kernel(X):
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    W = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            c = float(np.dot(X[i], X[j])) / (np.linalg.norm(X[i]) * np.linalg.norm(X[j]))
            W[i, j] = min(max(c, 0.0), 1.0)
    return W


def reference_kernel(X, spec):
    if spec.kind == "rbf":
        return reference_rbf_kernel(X, spec.gamma)
    return reference_cosine_kernel(X)


def fl_value(W, subset):
    """Facility-location value straight from the definition."""
    cols = np.asarray(W)[:, list(subset)]
    return float(cols.max(axis=1).sum())


def random_sequence(rng, max_len=8):
    """One valid token-stats sequence with greedy-decoding semantics."""
    length = int(rng.integers(1, max_len + 1))
    steps = []
    for _ in range(length):
        top1 = float(rng.uniform(0.34, 1.0))
        top2 = float(rng.uniform(0.0, min(top1, 1.0 - top1)))
        entropy = float(rng.uniform(0.0, 3.0))
        steps.append((entropy, top1, top2, top1))
    return TokenStatsSequence(steps)


def random_stats(rng, n, max_len=8):
    return [random_sequence(rng, max_len) for _ in range(n)]


def clustered_pool(rng, n=300, d=8, clusters=3, center_dist=8.0, spread=1.0):
    """Gaussian blobs with unit-scale spread and well-separated centers."""
    centers = rng.standard_normal((clusters, d))
    centers *= center_dist / math.sqrt(2 * d)
    assign = rng.integers(0, clusters, size=n)
    return centers[assign] + spread * rng.standard_normal((n, d)) / math.sqrt(d), assign
