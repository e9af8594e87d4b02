"""Streaming and out-of-core regression: selection, aggregation, resampling.

The package covers four ways of fitting linear and logistic models when the
data cannot (or should not) sit in memory at once:

- ``onlinesel``/``suffstats``: block-streaming least squares with running
  all-subsets selection by AIC, BIC and DIC;
- ``chunkglm``: chunked IRLS for gaussian and binomial GLMs over resettable
  sources;
- ``dnc``: independent block fits combined by information weighting;
- ``blb``: bag-of-little-bootstraps uncertainty from small subsamples.

``simharness`` regenerates the selection study the engine is checked
against, and the ``streamreg`` command line ties the engines to delimited
text files. Hot loops run through numba when available; set
STREAMREG_NUMBA=0 to force the pure-numpy paths (same results, slower).
"""

from ._accel import NUMBA_ENABLED, backend
from .blb import BlbConfig, BlbResult, blb_run, mean_estimator, ols_estimator, weighted_ols
from .chunkglm import (
    ArraySource,
    ChunkSource,
    GlmConfig,
    GlmFit,
    fit_glm_chunked,
    start_values,
)
from .dnc import BlockFit, CombinedFit, combine, fit_block_logistic
from .errors import (
    DimensionMismatch,
    DomainError,
    EmptyBlock,
    EmptyInput,
    EstimatorFailure,
    HeaderMismatch,
    InsufficientData,
    MalformedRow,
    NonConvergence,
    NonFiniteInput,
    NotPositiveDefinite,
    RankDeficientWarning,
    SeparationDetected,
    SourceExhaustedEarly,
    StreamRegError,
    SubsampleTooSmall,
    TooManyCovariates,
)
from .ingest import DelimitedSource, stream_file
from .onlinesel import (
    CriterionReport,
    ModelState,
    StreamState,
    criterion_values,
    enumerate_models,
    load_snapshot,
    mask_columns,
    mask_label,
    save_snapshot,
)
from .simharness import SimScenario, SimTally, compute_snr, gen_block, run_scenario
from .special import digamma
from .suffstats import BlockOls, BlockStats, accumulate_chunk, block_ols, merge

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "NUMBA_ENABLED",
    "backend",
    "digamma",
    "BlockStats",
    "BlockOls",
    "accumulate_chunk",
    "merge",
    "block_ols",
    "StreamState",
    "ModelState",
    "CriterionReport",
    "criterion_values",
    "enumerate_models",
    "mask_columns",
    "mask_label",
    "save_snapshot",
    "load_snapshot",
    "BlockFit",
    "CombinedFit",
    "combine",
    "fit_block_logistic",
    "BlbConfig",
    "BlbResult",
    "blb_run",
    "weighted_ols",
    "mean_estimator",
    "ols_estimator",
    "ChunkSource",
    "ArraySource",
    "GlmConfig",
    "GlmFit",
    "fit_glm_chunked",
    "start_values",
    "SimScenario",
    "SimTally",
    "compute_snr",
    "gen_block",
    "run_scenario",
    "DelimitedSource",
    "stream_file",
    "StreamRegError",
    "DimensionMismatch",
    "NonFiniteInput",
    "NotPositiveDefinite",
    "DomainError",
    "EmptyBlock",
    "TooManyCovariates",
    "InsufficientData",
    "EmptyInput",
    "NonConvergence",
    "SeparationDetected",
    "SubsampleTooSmall",
    "EstimatorFailure",
    "HeaderMismatch",
    "MalformedRow",
    "SourceExhaustedEarly",
    "RankDeficientWarning",
]
