"""Brute-force reference optimizers for tests and debugging.

Everything here enumerates subsets and evaluates objectives straight
from their set-function definitions, independently of the incremental
machinery in the production modules.  Bounds are deliberately small so
an accidental large call fails fast instead of hanging.

Ties are resolved to the lexicographically smallest subset (enumeration
order), so results are deterministic.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .errors import InstanceTooLarge

__all__ = [
    "exhaustive_fl_opt",
    "exhaustive_kcenter_opt",
    "exhaustive_mixture_opt",
    "exhaustive_topk",
]

MAX_N = 14
MAX_K = 5
TOPK_MAX_N = 20


def _check_bounds(n, k, max_n=MAX_N, max_k=MAX_K):
    if n > max_n or k > max_k:
        raise InstanceTooLarge(f"n={n}, k={k} beyond enumeration bounds ({max_n}, {max_k})")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")


def exhaustive_fl_opt(kernel, k: int):
    """Exact maximizer of sum_i max_{j in S} w_ij over all size-k subsets."""
    W = np.asarray(kernel, dtype=np.float64)
    n = W.shape[0]
    _check_bounds(n, k)
    best_set, best_val = None, -math.inf
    for S in combinations(range(n), k):
        val = float(W[:, S].max(axis=1).sum())
        if val > best_val:
            best_set, best_val = S, val
    return best_set, best_val


def exhaustive_mixture_opt(kernel, shifted_u, k: int, log_weight: float = 1.0):
    """Exact maximizer of FL plus log_weight * log(1 + sum of shifted uncertainties)."""
    W = np.asarray(kernel, dtype=np.float64)
    u = np.asarray(shifted_u, dtype=np.float64)
    n = W.shape[0]
    _check_bounds(n, k)
    best_set, best_val = None, -math.inf
    for S in combinations(range(n), k):
        val = float(W[:, S].max(axis=1).sum()) + log_weight * math.log1p(float(u[list(S)].sum()))
        if val > best_val:
            best_set, best_val = S, val
    return best_set, best_val


def exhaustive_kcenter_opt(points, k: int):
    """Exact minimizer of the covering radius max_i min_{j in S} ||p_i - p_j||."""
    P = np.asarray(points, dtype=np.float64)
    if P.ndim == 1:
        P = P[:, None]
    n = P.shape[0]
    _check_bounds(n, k)
    D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(axis=2))
    best_set, best_rad = None, math.inf
    for S in combinations(range(n), k):
        rad = float(D[:, S].min(axis=1).max())
        if rad < best_rad:
            best_set, best_rad = S, rad
    return best_set, best_rad


def exhaustive_topk(scores, k: int):
    """Exact maximizer of min_{i in S} scores[i] over size-k subsets.

    With distinct scores the optimum is unique and equals the top-k set;
    under ties any set of k elements scoring at least the k-th largest
    value is optimal and the lexicographically smallest one is returned.
    """
    s = [float(v) for v in np.asarray(scores, dtype=np.float64)]
    n = len(s)
    if n > TOPK_MAX_N:
        raise InstanceTooLarge(f"n={n} beyond enumeration bound {TOPK_MAX_N}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    best_set, best_val = None, -math.inf
    for S, vals in zip(combinations(range(n), k), combinations(s, k)):
        val = min(vals)
        if val > best_val:
            best_set, best_val = S, val
    return best_set, best_val
