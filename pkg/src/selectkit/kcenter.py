"""Greedy farthest-first traversal for the k-center (minimax) objective.

Each added center is the point farthest from the current center set,
which carries a 2x multiplicative guarantee on the optimal covering
radius.  Distances are compared in squared form (a monotone equivalent
that avoids per-step square roots); reported radii are square-rooted.
"""

from __future__ import annotations

import math

import numpy as np

from .core import EmbeddingMatrix, SelectionResult, make_rng, validate_inputs
from .errors import ValidationError
from .kernels import pairwise_sq_distance_column

__all__ = ["kcenter_greedy"]


def _medoid_index(emb: EmbeddingMatrix) -> int:
    # Point minimizing squared distance to the pool mean; ties -> lowest index.
    data, rsn = emb.data64, emb.row_sq_norms
    mean = data.mean(axis=0)
    d2 = rsn - 2.0 * (data @ mean) + mean @ mean
    return int(np.argmin(d2))


def kcenter_greedy(embeddings, budget, first="medoid", seed=None) -> SelectionResult:
    """Select k centers by farthest-first traversal.

    ``first`` controls the initial center: "medoid" (default, fully
    deterministic), "random" (uniform, driven by ``seed``), or an
    explicit point index.  objective_trace[t] is the covering radius
    after t + 1 centers.
    """
    cfg = validate_inputs(embeddings=embeddings, budget=budget)
    emb, k, n = cfg.embeddings, cfg.budget.k, cfg.n

    if first == "medoid":
        start = _medoid_index(emb)
    elif first == "random":
        start = int(make_rng(seed).integers(n))
    elif isinstance(first, (int, np.integer)):
        if not 0 <= first < n:
            raise ValidationError(f"first-center index {first} out of range for n={n}")
        start = int(first)
    else:
        raise ValidationError(f"unknown first-center mode {first!r}")

    chosen = [start]
    min_d2 = pairwise_sq_distance_column(emb, start)
    trace = [math.sqrt(float(min_d2.max()))]
    for _ in range(1, k):
        nxt = int(np.argmax(min_d2))  # ties -> lowest index
        chosen.append(nxt)
        np.minimum(min_d2, pairwise_sq_distance_column(emb, nxt), out=min_d2)
        trace.append(math.sqrt(float(min_d2.max())))
    return SelectionResult(indices=chosen, objective_trace=trace)
