"""Per-prompt uncertainty scores and top-k selection.

All four scores are oriented so that *larger means more uncertain*, and
top-k selection simply takes the k largest.  Taking the k largest is
exactly the set that maximizes the minimum score over all size-k
subsets, so no combinatorial search is needed.

Probability products are evaluated in log space; entropies are in nats.
Scores depend only on their own sequence, so scoring is order
independent and safe to parallelize across prompts.
"""

from __future__ import annotations

import enum

import numpy as np

from .core import SelectionResult, TokenStatsSequence, as_budget
from .errors import BudgetOutOfRange, ZeroProbability

__all__ = [
    "UncertaintyKind",
    "least_confidence",
    "mean_entropy",
    "mean_margin",
    "min_margin",
    "score_sequences",
    "select_topk_uncertain",
    "shifted_min_margin",
]


class UncertaintyKind(enum.Enum):
    MEAN_ENTROPY = "mean-entropy"
    LEAST_CONFIDENCE = "least-confidence"
    MEAN_MARGIN = "mean-margin"
    MIN_MARGIN = "min-margin"


def mean_entropy(seq: TokenStatsSequence) -> float:
    """Mean per-step Shannon entropy (nats); >= 0, larger = more uncertain."""
    return float(np.mean(seq.entropies))


def least_confidence(seq: TokenStatsSequence, length_normalize: bool = False) -> float:
    """Negated probability of the decoded sequence, in [-1, 0).

    The product of chosen-token probabilities is the model's confidence
    in its own output; negating it makes low-confidence sequences score
    high.  With ``length_normalize`` the geometric mean per token is used
    instead of the raw product, removing the bias toward long sequences
    (off by default; the raw product is the conventional form).
    """
    p = seq.chosen_probs
    if (p == 0.0).any():
        step = int(np.flatnonzero(p == 0.0)[0])
        raise ZeroProbability(f"chosen_prob is 0 at step {step}; log-likelihood undefined")
    log_total = float(np.sum(np.log(p)))
    if length_normalize:
        log_total /= len(seq)
    return -float(np.exp(log_total))


def mean_margin(seq: TokenStatsSequence) -> float:
    """Negated mean top1-top2 margin, in [-1, 0]; larger = tighter race on average."""
    return -float(np.mean(seq.top1_probs - seq.top2_probs))


def min_margin(seq: TokenStatsSequence) -> float:
    """Negated smallest top1-top2 margin, in [-1, 0].

    A single near-tied decoding step is enough to flip the generation
    under top-2 decoding, so the weakest step defines the score.
    """
    return -float(np.min(seq.top1_probs - seq.top2_probs))


_SCORERS = {
    UncertaintyKind.MEAN_ENTROPY: mean_entropy,
    UncertaintyKind.LEAST_CONFIDENCE: least_confidence,
    UncertaintyKind.MEAN_MARGIN: mean_margin,
    UncertaintyKind.MIN_MARGIN: min_margin,
}


def score_sequences(stats, kind: UncertaintyKind, length_normalize: bool = False) -> np.ndarray:
    """Score every sequence under one measure; returns a float64 array."""
    kind = UncertaintyKind(kind)
    if kind is UncertaintyKind.LEAST_CONFIDENCE:
        return np.array([least_confidence(s, length_normalize) for s in stats], dtype=np.float64)
    scorer = _SCORERS[kind]
    return np.array([scorer(s) for s in stats], dtype=np.float64)


def shifted_min_margin(stats) -> np.ndarray:
    """Min-margin scores shifted by +1 into [0, 1].

    The mixture objective composes the summed uncertainty with log1p,
    which needs nonnegative terms; the shift preserves the ranking.
    """
    return score_sequences(stats, UncertaintyKind.MIN_MARGIN) + 1.0


def rank_by_score(scores: np.ndarray) -> np.ndarray:
    """Indices ordered by descending score, ties by ascending index."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


def select_topk_uncertain(stats, kind: UncertaintyKind, budget, length_normalize: bool = False) -> SelectionResult:
    """Pick the k most uncertain prompts under ``kind``.

    Returned indices are sorted by descending score (ties by ascending
    index), which also maximizes the minimum score among all size-k
    subsets.
    """
    b = as_budget(budget)
    scores = score_sequences(stats, kind, length_normalize)
    if b.k > scores.shape[0]:
        raise BudgetOutOfRange(f"budget k={b.k} exceeds pool size n={scores.shape[0]}")
    order = rank_by_score(scores)
    return SelectionResult(indices=[int(i) for i in order[: b.k]])
