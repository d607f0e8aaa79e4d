"""Exception types shared across the package.

Classes are named after the condition they report, so callers (and the
CLI, which prints ``<name>: <message>`` on failure) can match on the
class name instead of parsing message text.
"""

from __future__ import annotations


class SelectKitError(Exception):
    """Base class for all selectkit errors."""


class ValidationError(SelectKitError):
    """One or more input invariants were violated.

    ``violations`` lists every individual violation found, so a caller
    sees the whole problem in one shot instead of fixing errors one at a
    time.
    """

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations is not None else [self]


class BudgetOutOfRange(ValidationError):
    """Selection budget k is outside [1, n]."""


class LengthMismatch(ValidationError):
    """Token-stats record count does not match the embedding pool size."""


class NonFiniteEmbedding(ValidationError):
    """Embedding matrix contains NaN or infinite entries."""


class ZeroProbability(SelectKitError):
    """A chosen-token probability of zero makes the log-likelihood undefined."""


class DimensionMismatch(SelectKitError):
    """Vector dimensions disagree."""


class ZeroNormRow(SelectKitError):
    """Cosine similarity is undefined for an all-zero feature row."""


class NegativeShiftedUncertainty(SelectKitError):
    """Shifted uncertainty scores handed to the mixture objective must be nonnegative."""


class InstanceTooLarge(SelectKitError):
    """Exhaustive-search helper called beyond its enumeration bounds."""


class EmptyCurveSet(SelectKitError):
    """No gain curves were supplied."""


class MagicMismatch(SelectKitError):
    """File does not start with the expected magic bytes / version."""


class TruncatedPayload(SelectKitError):
    """File payload length disagrees with what the header promises."""


class InvariantViolation(SelectKitError):
    """A record in a file violates a domain invariant.

    Carries the offending record id and step index when known.
    """

    def __init__(self, message: str, record_id=None, step=None):
        super().__init__(message)
        self.record_id = record_id
        self.step = step
