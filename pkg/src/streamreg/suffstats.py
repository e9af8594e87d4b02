"""Full-model cross-products per data block.

A block keeps only (n_k, X'X, X'Y, Y'Y) with the intercept column first.
Everything downstream, including every submodel update, derives from these,
so raw rows never need to be retained or revisited.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch, EmptyBlock, NonFiniteInput, NotPositiveDefinite
from .linalg import pseudo_inverse, solve_spd

__all__ = ["BlockStats", "BlockOls", "accumulate_chunk", "merge", "block_ols"]

logger = logging.getLogger(__name__)


@dataclass
class BlockStats:
    """Cross-products of one block: xtx[0][0] always equals n_k."""

    p: int
    n_k: int
    xtx: NDArray[np.float64]
    xty: NDArray[np.float64]
    yty: float

    @classmethod
    def empty(cls, p: int) -> "BlockStats":
        if p < 1:
            raise DimensionMismatch("need at least one covariate")
        q = p + 1
        return cls(p=p, n_k=0, xtx=np.zeros((q, q)), xty=np.zeros(q), yty=0.0)


@dataclass(frozen=True)
class BlockOls:
    """Least-squares summary of a single block."""

    beta_full: NDArray[np.float64]
    sse_full: float
    rank: int


def accumulate_chunk(stats: BlockStats, x, y) -> BlockStats:
    """Fold a chunk of design rows and responses into ``stats`` in place.

    x is (m, p+1) with a leading column of ones, y length m. Accumulation is
    plain summation, so any chunking of the same rows gives the same stats up
    to floating-point reassociation.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != stats.p + 1:
        raise DimensionMismatch(
            f"design chunk must be (rows, {stats.p + 1}), got {x.shape}"
        )
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise DimensionMismatch(
            f"response length {y.shape} does not match {x.shape[0]} rows"
        )
    if x.shape[0] == 0:
        return stats
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise NonFiniteInput("chunk contains NaN or infinite values")
    if not np.all(x[:, 0] == 1.0):
        raise ValueError("first design column must be the intercept (all ones)")
    g = x.T @ x
    stats.xtx += 0.5 * (g + g.T)  # keep exact symmetry regardless of BLAS path
    stats.xty += x.T @ y
    stats.yty += float(y @ y)
    stats.n_k += x.shape[0]
    return stats


def merge(a: BlockStats, b: BlockStats) -> BlockStats:
    """Componentwise sum of two blocks' statistics (a new BlockStats)."""
    if a.p != b.p:
        raise DimensionMismatch(f"cannot merge p={a.p} with p={b.p}")
    return BlockStats(
        p=a.p,
        n_k=a.n_k + b.n_k,
        xtx=a.xtx + b.xtx,
        xty=a.xty + b.xty,
        yty=a.yty + b.yty,
    )


def block_ols(stats: BlockStats) -> BlockOls:
    """Full-model OLS from the accumulated cross-products.

    Cholesky first, pseudo-inverse when the Gram matrix is rank deficient.
    A slightly negative residual sum of squares from cancellation is clamped
    to zero; anything below -1e-10 * yty is logged as suspicious first.
    """
    if stats.n_k == 0:
        raise EmptyBlock("block has no observations")
    try:
        beta = solve_spd(stats.xtx, stats.xty)
    except NotPositiveDefinite:
        beta = pseudo_inverse(stats.xtx) @ stats.xty
    sse = stats.yty - float(beta @ stats.xtx @ beta)
    if sse < 0.0:
        if sse < -1e-10 * stats.yty:
            logger.warning(
                "block SSE clamped from %g to 0; cancellation beyond guard", sse
            )
        sse = 0.0
    rank = int(np.linalg.matrix_rank(stats.xtx, hermitian=True))
    return BlockOls(beta_full=beta, sse_full=sse, rank=rank)
