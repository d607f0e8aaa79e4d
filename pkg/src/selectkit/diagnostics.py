"""Kernel-width saturation diagnostics.

For each candidate RBF width gamma, run the lazy facility-location
greedy to the full budget and record the per-step marginal gains.  A
width whose gains collapse toward zero well before the budget is
*saturated*: late selections no longer add coverage, a sign the kernel
is too flat.  At the other extreme a too-small width makes the kernel
effectively diagonal and similarities carry no information.  The
recommendation keeps the widths that avoid both failure modes.

The saturation threshold defaults to 1e-3 x each curve's first-step
gain (scale free); pass an absolute threshold to override.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import KernelSpec, as_budget, make_rng, validate_inputs
from .errors import EmptyCurveSet, ValidationError
from .facility_location import fl_greedy_lazy

__all__ = [
    "GainCurve",
    "GammaRecommendation",
    "gain_curves_csv",
    "gain_sweep",
    "recommend_gamma_range",
    "write_gain_curves_csv",
    "write_gamma_report_json",
]

RELATIVE_THRESHOLD = 1e-3
DIAGONAL_FLOOR = 1e-6
PAIR_SAMPLE = 10_000


@dataclass(frozen=True)
class GainCurve:
    """Per-step greedy gains for one kernel width.

    saturation_step is the smallest k whose gain fell below the
    threshold, or None if gains stayed at or above it through the
    budget.  median_offdiag is the median similarity over a sampled set
    of distinct pairs, used to flag effectively-diagonal kernels.
    """

    gamma: float
    ks: list[int]
    gains: list[float]
    objectives: list[float]
    threshold: float
    saturation_step: int | None
    median_offdiag: float


@dataclass(frozen=True)
class GammaRecommendation:
    stable: list[float]
    rejected: list[tuple[float, str]]


def _median_offdiag_sq_distance(emb, pairs: int, seed) -> float:
    """Median ||f_i - f_j||^2 over ``pairs`` sampled pairs with i != j."""
    n = emb.n
    rng = make_rng(seed)
    i = rng.integers(0, n, size=pairs)
    j = (i + rng.integers(1, n, size=pairs)) % n  # uniform over ordered pairs, i != j
    diff = emb.data64[i] - emb.data64[j]
    return float(np.median(np.einsum("ij,ij->i", diff, diff)))


def gain_sweep(embeddings, gammas, budget, threshold: float | None = None,
               pair_sample: int = PAIR_SAMPLE, seed=0) -> list[GainCurve]:
    """One lazy greedy run per gamma; returns the gain curve for each.

    ``threshold`` is the absolute saturation cutoff; None means 1e-3
    times each curve's own first-step gain.
    """
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValidationError("gamma sweep needs at least one gamma")
    if threshold is not None and threshold < 0:
        raise ValidationError(f"threshold must be >= 0, got {threshold}")
    cfg = validate_inputs(embeddings=embeddings, budget=budget)
    emb, b = cfg.embeddings, cfg.budget
    med_d2 = _median_offdiag_sq_distance(emb, pair_sample, seed) if emb.n > 1 else 0.0

    curves = []
    for gamma in gammas:
        res = fl_greedy_lazy(emb, KernelSpec.rbf(gamma), b)
        thr = threshold if threshold is not None else RELATIVE_THRESHOLD * res.gains[0]
        sat = None
        for step, g in enumerate(res.gains, start=1):
            if g < thr:
                sat = step
                break
        curves.append(
            GainCurve(
                gamma=gamma,
                ks=list(range(1, b.k + 1)),
                gains=list(res.gains),
                objectives=list(res.objective_trace),
                threshold=float(thr),
                saturation_step=sat,
                # exp is monotone, so the median similarity is the similarity
                # of the median squared distance
                median_offdiag=float(np.exp(-med_d2 / gamma)),
            )
        )
    return curves


def recommend_gamma_range(curves, budget, floor: float = DIAGONAL_FLOOR) -> GammaRecommendation:
    """Split sweep results into usable widths and rejected ones (with reasons).

    A width is kept only if its gains never fell below the threshold
    through the budget and its kernel is not effectively diagonal
    (median off-diagonal similarity at or above ``floor``).
    """
    curves = list(curves)
    if not curves:
        raise EmptyCurveSet("no gain curves to analyze")
    k = as_budget(budget).k
    for c in curves:
        if len(c.ks) != k:
            raise ValidationError(
                f"curve for gamma={c.gamma:g} ran to k={len(c.ks)}, expected budget {k}"
            )
    stable, rejected = [], []
    for c in curves:
        if c.median_offdiag < floor:
            rejected.append(
                (c.gamma,
                 f"near-diagonal kernel: median off-diagonal similarity "
                 f"{c.median_offdiag:.3e} < {floor:.0e}")
            )
        elif c.saturation_step is not None:
            rejected.append((c.gamma, f"gain saturated at step {c.saturation_step}"))
        else:
            stable.append(c.gamma)
    return GammaRecommendation(stable=stable, rejected=rejected)


def gain_curves_csv(curves) -> str:
    """CSV text for a sweep: columns gamma,k,gain,objective; 9 significant digits."""
    lines = ["gamma,k,gain,objective"]
    for c in curves:
        for k_, g, o in zip(c.ks, c.gains, c.objectives):
            lines.append(f"{c.gamma:.9g},{k_},{g:.9g},{o:.9g}")
    return "\n".join(lines) + "\n"


def write_gain_curves_csv(path, curves):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(gain_curves_csv(curves))


def write_gamma_report_json(path, recommendation: GammaRecommendation, curves, budget):
    """JSON summary of a sweep: stable widths plus rejected widths with reasons."""
    by_gamma = {c.gamma: c for c in curves}
    doc = {
        "budget": as_budget(budget).k,
        "stable": recommendation.stable,
        "rejected": [
            {
                "gamma": gamma,
                "reason": reason,
                "saturation_step": by_gamma[gamma].saturation_step if gamma in by_gamma else None,
            }
            for gamma, reason in recommendation.rejected
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
