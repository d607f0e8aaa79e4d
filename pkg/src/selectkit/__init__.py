"""selectkit: subset selection for annotation budgets.

Given prompt embeddings and/or per-token generation statistics, pick the
k prompts most worth annotating: by uncertainty (top-k under four
scores), by geometric coverage (k-center farthest-first), by
facility-location submodular maximization (naive / lazy / stochastic
greedy, RBF or clipped-cosine kernel), or by a mixture of coverage and
uncertainty.  Saturation diagnostics help choose a usable RBF width
before committing an annotation budget.
"""

from .core import (
    Budget,
    EmbeddingMatrix,
    KernelSpec,
    RunConfig,
    SelectionResult,
    TokenStats,
    TokenStatsSequence,
    make_rng,
    random_selection,
    validate_inputs,
)
from .diagnostics import (
    GainCurve,
    GammaRecommendation,
    gain_curves_csv,
    gain_sweep,
    recommend_gamma_range,
    write_gain_curves_csv,
    write_gamma_report_json,
)
from .errors import (
    BudgetOutOfRange,
    DimensionMismatch,
    EmptyCurveSet,
    InstanceTooLarge,
    InvariantViolation,
    LengthMismatch,
    MagicMismatch,
    NegativeShiftedUncertainty,
    NonFiniteEmbedding,
    SelectKitError,
    TruncatedPayload,
    ValidationError,
    ZeroNormRow,
    ZeroProbability,
)
from .facility_location import (
    CoverageState,
    fl_gain,
    fl_greedy_lazy,
    fl_greedy_naive,
    fl_greedy_stochastic,
    mixture_gain,
)
from .io import (
    file_digest,
    read_embeddings,
    read_selection,
    read_token_stats,
    write_embeddings,
    write_selection,
    write_token_stats,
)
from .kcenter import kcenter_greedy
from .kernels import (
    SimilarityColumn,
    column_sums,
    cosine_clipped_similarity,
    pairwise_sq_distance_column,
    rbf_similarity,
    similarity_column,
)
from .uncertainty import (
    UncertaintyKind,
    least_confidence,
    mean_entropy,
    mean_margin,
    min_margin,
    score_sequences,
    select_topk_uncertain,
    shifted_min_margin,
)

__version__ = "0.1.0"
