"""Bag of little bootstraps.

Draw s subsamples of size m = floor(n^gamma) without replacement. Within
each, draw r multinomial weight vectors of total n over the m points, so
each replicate behaves like a bootstrap sample of the full size while only
m rows are ever touched. Per subsample, the spread of the r weighted
estimates gives an SD and a percentile interval; the s subsamples' results
are averaged. No analytic rescaling is applied anywhere: the nominal-n
weights already put the replicates on the full-data scale.

Estimators are callables (rows, weights) -> vector. ``mean_estimator`` and
``ols_estimator`` cover the built-in cases; anything with that signature
works, and failures are re-raised with the offending subsample index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import (
    EmptyInput,
    EstimatorFailure,
    NotPositiveDefinite,
    RankDeficientWarning,
    SubsampleTooSmall,
)
from .linalg import pseudo_inverse, solve_spd

__all__ = [
    "BlbConfig",
    "BlbResult",
    "blb_run",
    "weighted_ols",
    "mean_estimator",
    "ols_estimator",
]


@dataclass(frozen=True)
class BlbConfig:
    """Subsampling schedule: m = floor(n^gamma), s subsamples, r replicates."""

    gamma: float = 0.7
    s: int = 20
    r: int = 100
    seed: int = 0
    ci_level: float = 0.95

    def __post_init__(self) -> None:
        if not 0.5 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0.5, 1], got {self.gamma}")
        if self.s < 1:
            raise ValueError(f"need at least one subsample, got s={self.s}")
        if self.r < 2:
            raise ValueError(f"need at least two replicates, got r={self.r}")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError(f"ci_level must lie in (0, 1), got {self.ci_level}")


@dataclass(frozen=True)
class BlbResult:
    """Averages over subsamples of the per-subsample bootstrap summaries."""

    point: NDArray[np.float64]
    sd: NDArray[np.float64]
    ci_lo: NDArray[np.float64]
    ci_hi: NDArray[np.float64]
    m_used: int
    s_used: int
    r_used: int


def blb_run(data, estimator, cfg: BlbConfig) -> BlbResult:
    """Run the full procedure over ``data`` (rows along the first axis).

    Each subsample owns an RNG substream spawned from (seed, subsample
    index), so results are bit-identical for a given seed no matter how
    the subsample loop is scheduled.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if n < 2:
        raise EmptyInput(f"need at least two rows, got {n}")
    m = int(np.floor(n**cfg.gamma))
    if m < 2:
        raise SubsampleTooSmall(f"floor(n^gamma) = {m} is below the minimum of 2")

    points = []
    sds = []
    los = []
    his = []
    half_tail = 100.0 * (1.0 - cfg.ci_level) / 2.0
    for i in range(cfg.s):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(i,)))
        )
        subsample = data[rng.choice(n, size=m, replace=False)]
        estimates = None
        for j in range(cfg.r):
            weights = np.bincount(rng.integers(0, m, size=n), minlength=m)
            try:
                est = np.atleast_1d(
                    np.asarray(estimator(subsample, weights), dtype=np.float64)
                )
            except Exception as exc:
                raise EstimatorFailure(i, str(exc)) from exc
            if estimates is None:
                estimates = np.empty((cfg.r, est.shape[0]))
            estimates[j] = est
        points.append(estimates.mean(axis=0))
        sds.append(estimates.std(axis=0, ddof=1))
        lo, hi = np.percentile(
            estimates,
            [half_tail, 100.0 - half_tail],
            axis=0,
            method="normal_unbiased",
        )
        los.append(lo)
        his.append(hi)
    return BlbResult(
        point=np.mean(points, axis=0),
        sd=np.mean(sds, axis=0),
        ci_lo=np.mean(los, axis=0),
        ci_hi=np.mean(his, axis=0),
        m_used=m,
        s_used=cfg.s,
        r_used=cfg.r,
    )


def weighted_ols(x, y, weights) -> NDArray[np.float64]:
    """Least squares with nonnegative case weights.

    Equivalent to replicating row i ``weights[i]`` times for integer
    weights. Falls back to the pseudo-inverse with a RankDeficientWarning
    when the weighted Gram matrix is singular, as happens under extreme
    weight draws that concentrate on too few rows.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    xw = x * w[:, None]
    g = xw.T @ x
    g = 0.5 * (g + g.T)
    b = xw.T @ y
    try:
        return solve_spd(g, b)
    except NotPositiveDefinite:
        warnings.warn(
            "weighted design is rank deficient; returning minimum-norm solution",
            RankDeficientWarning,
            stacklevel=2,
        )
        return pseudo_inverse(g) @ b


def mean_estimator():
    """Estimator computing the weighted mean of each column."""

    def estimate(rows, weights):
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64).T).T
        return weights @ rows / weights.sum()

    return estimate


def ols_estimator():
    """Estimator regressing the last column on the rest (intercept included)."""

    def estimate(rows, weights):
        return weighted_ols(rows[:, :-1], rows[:, -1], weights)

    return estimate
