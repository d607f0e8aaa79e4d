"""Shared domain types, input validation, and deterministic RNG plumbing.

Every selection strategy in this package consumes the types below and
returns a :class:`SelectionResult`.  Given identical inputs and seed, a
strategy must produce a bitwise-identical index list; ties in any score
or gain comparison are always broken toward the lowest index.

All probability work downstream happens in log space and all score /
kernel accumulations run in float64, even when embeddings are stored in
float32, so argmax decisions stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetOutOfRange,
    LengthMismatch,
    NonFiniteEmbedding,
    ValidationError,
)

__all__ = [
    "Budget",
    "EmbeddingMatrix",
    "KernelSpec",
    "RunConfig",
    "SelectionResult",
    "TokenStats",
    "TokenStatsSequence",
    "as_budget",
    "make_rng",
    "random_selection",
    "validate_inputs",
]


def make_rng(seed) -> np.random.Generator:
    """Single entry point for seeding, so every randomized path is reproducible."""
    return np.random.default_rng(seed)


class EmbeddingMatrix:
    """Pool of n prompt feature vectors, one row of dimension d per prompt.

    The array is kept in its stored dtype (float32 or float64); compute
    paths read the lazily cached float64 view ``data64``.  ``provenance``
    identifies the upstream extractor, which matters because RBF kernel
    widths are only meaningful relative to the embedding scale.
    """

    def __init__(self, data, provenance: str = ""):
        arr = np.ascontiguousarray(data)
        if arr.ndim != 2:
            raise ValidationError(f"embeddings must be a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(
                f"embedding matrix needs at least one row and one column, got shape {arr.shape}"
            )
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if not np.isfinite(arr).all():
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise NonFiniteEmbedding(
                f"embedding entry at row {bad // arr.shape[1]}, col {bad % arr.shape[1]} is not finite"
            )
        self.data = arr
        self.provenance = provenance
        self._data64 = None
        self._row_sq_norms = None

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    @property
    def data64(self) -> np.ndarray:
        """Float64 view of the pool (cached; same object when already float64)."""
        if self._data64 is None:
            if self.data.dtype == np.float64:
                self._data64 = self.data
            else:
                self._data64 = self.data.astype(np.float64)
        return self._data64

    @property
    def row_sq_norms(self) -> np.ndarray:
        """Cached squared row norms ||f_i||^2, computed in float64."""
        if self._row_sq_norms is None:
            d64 = self.data64
            self._row_sq_norms = np.einsum("ij,ij->i", d64, d64)
        return self._row_sq_norms

    def __repr__(self):
        return f"EmbeddingMatrix(n={self.n}, d={self.d}, dtype={self.data.dtype})"


@dataclass(frozen=True)
class TokenStats:
    """Per-decoding-step summary of the softmax distribution.

    entropy is the Shannon entropy in nats; top1/top2 are the two largest
    probabilities; chosen_prob is the probability of the decoded token.
    Under greedy decoding chosen_prob equals top1_prob, but traces from
    other decoders are representable as long as chosen_prob stays in
    (0, 1].
    """

    entropy: float
    top1_prob: float
    top2_prob: float
    chosen_prob: float


class TokenStatsSequence:
    """Ordered per-step token statistics for one prompt's generation."""

    __slots__ = ("_arr",)

    def __init__(self, steps):
        if isinstance(steps, np.ndarray):
            arr = np.array(steps, dtype=np.float64)
        else:
            rows = []
            for s in steps:
                if isinstance(s, TokenStats):
                    rows.append((s.entropy, s.top1_prob, s.top2_prob, s.chosen_prob))
                else:
                    rows.append(tuple(float(v) for v in s))
            arr = np.array(rows, dtype=np.float64) if rows else np.empty((0, 4))
        if arr.ndim != 2 or arr.shape[1] != 4 or arr.shape[0] < 1:
            raise ValidationError(
                "a token-stats sequence needs at least one "
                "(entropy, top1_prob, top2_prob, chosen_prob) step"
            )
        arr.setflags(write=False)
        self._arr = arr

    def __len__(self) -> int:
        return self._arr.shape[0]

    @property
    def entropies(self) -> np.ndarray:
        return self._arr[:, 0]

    @property
    def top1_probs(self) -> np.ndarray:
        return self._arr[:, 1]

    @property
    def top2_probs(self) -> np.ndarray:
        return self._arr[:, 2]

    @property
    def chosen_probs(self) -> np.ndarray:
        return self._arr[:, 3]

    @property
    def steps(self) -> tuple[TokenStats, ...]:
        return tuple(TokenStats(*row) for row in self._arr)

    def first_violation(self, record_id=None) -> str | None:
        """Describe the first per-step invariant violation, or None if clean.

        Checked per step: all values finite, entropy >= 0,
        0 <= top2 <= top1 <= 1, and 0 < chosen <= 1.
        """
        a = self._arr
        where = f"record {record_id}, " if record_id is not None else ""
        checks = [
            (~np.isfinite(a).all(axis=1), "non-finite value"),
            (a[:, 0] < 0, "entropy < 0"),
            (a[:, 2] < 0, "top2_prob < 0"),
            (a[:, 2] > a[:, 1], "top2_prob > top1_prob"),
            (a[:, 1] > 1, "top1_prob > 1"),
            (a[:, 3] <= 0, "chosen_prob <= 0"),
            (a[:, 3] > 1, "chosen_prob > 1"),
        ]
        for bad, what in checks:
            if bad.any():
                step = int(np.flatnonzero(bad)[0])
                return f"{where}step {step}: {what}"
        return None

    def __repr__(self):
        return f"TokenStatsSequence(len={len(self)})"


@dataclass(frozen=True)
class Budget:
    """Number of prompts to select; must satisfy 1 <= k <= pool size."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise BudgetOutOfRange(f"budget k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))


def as_budget(budget) -> Budget:
    return budget if isinstance(budget, Budget) else Budget(int(budget))


@dataclass(frozen=True)
class KernelSpec:
    """Similarity kernel choice: RBF with width gamma, or clipped cosine."""

    RBF = "rbf"
    COSINE = "cosine"

    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind == self.RBF:
            if self.gamma is None or not np.isfinite(self.gamma) or self.gamma <= 0:
                raise ValidationError(f"rbf kernel requires gamma > 0, got {self.gamma}")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.kind == self.COSINE:
            if self.gamma is not None:
                raise ValidationError("cosine kernel takes no gamma")
        else:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def rbf(cls, gamma: float) -> "KernelSpec":
        return cls(cls.RBF, float(gamma))

    @classmethod
    def cosine(cls) -> "KernelSpec":
        return cls(cls.COSINE)

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse the CLI form: ``rbf:GAMMA`` (e.g. ``rbf:0.002``) or ``cosine``."""
        t = text.strip()
        if t == cls.COSINE:
            return cls.cosine()
        if t.startswith(cls.RBF + ":"):
            try:
                return cls.rbf(float(t.split(":", 1)[1]))
            except ValueError:
                raise ValidationError(f"bad rbf gamma in kernel spec {text!r}") from None
        raise ValidationError(f"unknown kernel spec {text!r} (expected rbf:GAMMA or cosine)")

    def __str__(self):
        return f"rbf:{self.gamma:g}" if self.kind == self.RBF else "cosine"


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection run.

    indices are in selection order and unique.  objective_trace holds the
    strategy's objective after each step (covering radius for k-center,
    facility-location value for the greedy variants; empty for
    uncertainty and random strategies).  gains holds the per-step
    marginal gains for facility-location strategies only.
    """

    indices: list[int]
    objective_trace: list[float] = field(default_factory=list)
    gains: list[float] = field(default_factory=list)

    def check(self, n: int | None = None):
        """Raise ValidationError if indices are not unique / in range."""
        if len(set(self.indices)) != len(self.indices):
            raise ValidationError("selection contains duplicate indices")
        if self.indices and min(self.indices) < 0:
            raise ValidationError("selection contains a negative index")
        if n is not None and self.indices and max(self.indices) >= n:
            raise ValidationError(f"selection index {max(self.indices)} out of range for n={n}")
        return self


@dataclass(frozen=True)
class RunConfig:
    """Validated, normalized inputs for one selection run."""

    n: int
    budget: Budget
    embeddings: EmbeddingMatrix | None = None
    stats: list[TokenStatsSequence] | None = None


def _coerce_stats(stats) -> list[TokenStatsSequence]:
    return [s if isinstance(s, TokenStatsSequence) else TokenStatsSequence(s) for s in stats]


def validate_inputs(embeddings=None, stats=None, budget=None) -> RunConfig:
    """Cross-check inputs and normalize them into a :class:`RunConfig`.

    Collects every violation before raising: with exactly one violation
    the specific error type is raised, otherwise a ValidationError whose
    ``violations`` lists all of them.
    """
    violations: list[ValidationError] = []

    emb = None
    if embeddings is not None:
        if isinstance(embeddings, EmbeddingMatrix):
            emb = embeddings
        else:
            try:
                emb = EmbeddingMatrix(embeddings)
            except ValidationError as exc:
                violations.append(exc)

    seqs = None
    if stats is not None:
        try:
            seqs = _coerce_stats(stats)
        except ValidationError as exc:
            violations.append(exc)

    if emb is None and seqs is None and not violations:
        violations.append(ValidationError("need embeddings, token stats, or both"))

    n = emb.n if emb is not None else (len(seqs) if seqs is not None else 0)
    n_known = emb is not None or seqs is not None
    if emb is not None and seqs is not None and len(seqs) != emb.n:
        violations.append(
            LengthMismatch(f"{len(seqs)} token-stats records for {emb.n} embedded prompts")
        )

    b = None
    try:
        b = as_budget(budget)
    except ValidationError as exc:
        violations.append(exc)
    if b is not None and n_known and b.k > n:
        violations.append(BudgetOutOfRange(f"budget k={b.k} exceeds pool size n={n}"))

    if violations:
        if len(violations) == 1:
            raise violations[0]
        raise ValidationError(
            "; ".join(str(v) for v in violations), violations=violations
        )
    return RunConfig(n=n, budget=b, embeddings=emb, stats=seqs)


def random_selection(n: int, budget, seed) -> SelectionResult:
    """Uniform sample of k distinct indices: the baseline every strategy is judged against."""
    b = as_budget(budget)
    if b.k > n:
        raise BudgetOutOfRange(f"budget k={b.k} exceeds pool size n={n}")
    idx = make_rng(seed).choice(n, size=b.k, replace=False)
    return SelectionResult(indices=[int(i) for i in idx])
