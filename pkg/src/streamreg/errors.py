"""Exception and warning types shared across the package."""

from __future__ import annotations

__all__ = [
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


class StreamRegError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(StreamRegError, ValueError):
    """Operands have incompatible shapes or lengths."""


class NonFiniteInput(StreamRegError, ValueError):
    """Input contains NaN or infinity where finite values are required."""


class NotPositiveDefinite(StreamRegError, ArithmeticError):
    """A Cholesky pivot fell at or below tolerance; use the pseudo-inverse path."""


class DomainError(StreamRegError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class EmptyBlock(StreamRegError, ValueError):
    """A data block with zero observations where at least one is required."""


class TooManyCovariates(StreamRegError, ValueError):
    """Covariate count exceeds the model-enumeration cap."""


class InsufficientData(StreamRegError, ValueError):
    """Too few observations accumulated for the requested quantity."""


class EmptyInput(StreamRegError, ValueError):
    """An empty collection where at least one element is required."""


class NonConvergence(StreamRegError, RuntimeError):
    """An iterative fit exhausted its iteration budget."""


class SeparationDetected(StreamRegError, RuntimeError):
    """Logistic coefficients diverged, indicating (quasi-)separated data."""


class SubsampleTooSmall(StreamRegError, ValueError):
    """Subsample size below the estimator's minimum support."""


class EstimatorFailure(StreamRegError, RuntimeError):
    """An estimator raised during a resampling replicate.

    Carries ``subsample_index`` so the failing pipeline can be identified.
    """

    def __init__(self, subsample_index: int, message: str):
        super().__init__(f"subsample {subsample_index}: {message}")
        self.subsample_index = subsample_index


class HeaderMismatch(StreamRegError, ValueError):
    """A referenced column is missing from the input header."""


class MalformedRow(StreamRegError, ValueError):
    """A data row that cannot be parsed under the configured policy."""


class SourceExhaustedEarly(StreamRegError, RuntimeError):
    """A chunk source replayed fewer rows than an earlier pass delivered."""


class RankDeficientWarning(UserWarning):
    """A solve fell back to the pseudo-inverse because of rank deficiency."""
