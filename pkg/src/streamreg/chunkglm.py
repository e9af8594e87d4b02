"""GLM fitting over a data source too large to hold in memory.

Each reweighted-least-squares iteration is one full pass over a resettable
chunk source. A pass accumulates X'WX and X'Wz for the next solve together
with the deviance at the coefficients it entered with, so convergence is
detected one pass after the step that achieved it and the reported standard
errors come from the information matrix at the returned coefficients. Only
one chunk is resident at a time; nothing is retained across chunks beyond
the (p+1)-sized accumulators.

The gaussian-identity family needs no reweighting, so a single pass over
the data is exact and the fit reports one iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DimensionMismatch,
    EmptyInput,
    NotPositiveDefinite,
    SourceExhaustedEarly,
)
from .linalg import (
    QrState,
    incremental_qr_update,
    pseudo_inverse,
    qr_gram,
    qr_solve,
    solve_spd,
)

__all__ = [
    "ChunkSource",
    "ArraySource",
    "GlmConfig",
    "GlmFit",
    "fit_glm_chunked",
    "start_values",
]

logger = logging.getLogger(__name__)

FAMILIES = ("gaussian-identity", "binomial-logit")

_FAMILY_ALIASES = {
    "gaussian": "gaussian-identity",
    "binomial": "binomial-logit",
    "logistic": "binomial-logit",
}


class ChunkSource(Protocol):
    """Resettable supplier of (design, response) chunks.

    next_chunk() returns the next chunk as a pair of arrays, the design
    (rows, p+1) with intercept column first and the response (rows,). An
    empty pair signals end of data. next_chunk(reset=True) restarts from
    the beginning; two full passes must yield identical row sequences.
    """

    def next_chunk(
        self, reset: bool = False
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]: ...


class ArraySource:
    """ChunkSource over in-memory arrays, mostly for tests and small jobs."""

    def __init__(self, x, y, chunk_size: int = 500_000):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        if self.x.ndim != 2 or self.y.ndim != 1 or self.x.shape[0] != self.y.shape[0]:
            raise DimensionMismatch(
                f"incompatible shapes {self.x.shape} and {self.y.shape}"
            )
        if chunk_size < 1:
            raise ValueError(f"chunk_size must be positive, got {chunk_size}")
        self.chunk_size = chunk_size
        self._pos = 0

    def next_chunk(self, reset: bool = False):
        if reset:
            self._pos = 0
        lo = self._pos
        hi = min(lo + self.chunk_size, self.x.shape[0])
        self._pos = hi
        return self.x[lo:hi], self.y[lo:hi]


@dataclass(frozen=True)
class GlmConfig:
    family: str = "gaussian-identity"
    max_iter: int = 25
    tol: float = 1e-8
    chunk_size: int = 500_000
    use_qr: bool = False

    def __post_init__(self) -> None:
        canonical = _FAMILY_ALIASES.get(self.family, self.family)
        if canonical not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", canonical)
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass(frozen=True)
class GlmFit:
    beta: NDArray[np.float64]
    se: NDArray[np.float64]
    deviance: float
    iterations: int
    n: int
    converged: bool
    rank_deficient: bool
    n_rejected: int


class _CrossProdAcc:
    """X'WX / X'Wz accumulation; one solve per pass."""

    def __init__(self, q: int):
        self.g = np.zeros((q, q))
        self.b = np.zeros(q)

    def absorb(self, x, w, z) -> None:
        xw = x * w[:, None]
        g = xw.T @ x
        self.g += 0.5 * (g + g.T)
        self.b += xw.T @ z

    def solve(self) -> tuple[NDArray[np.float64], bool]:
        try:
            return solve_spd(self.g, self.b), False
        except NotPositiveDefinite:
            return pseudo_inverse(self.g) @ self.b, True

    def gram(self) -> NDArray[np.float64]:
        return self.g


class _GivensAcc:
    """Row-by-row orthogonal accumulation; slower, stabler on bad conditioning."""

    def __init__(self, q: int):
        self.state = QrState(q)

    def absorb(self, x, w, z) -> None:
        for i in range(x.shape[0]):
            incremental_qr_update(self.state, x[i], float(w[i]), float(z[i]))

    def solve(self) -> tuple[NDArray[np.float64], bool]:
        deficient = bool(np.any(np.abs(np.diag(self.state.r)) == 0.0))
        return qr_solve(self.state), deficient

    def gram(self) -> NDArray[np.float64]:
        return qr_gram(self.state)


def fit_glm_chunked(src: ChunkSource, cfg: GlmConfig) -> GlmFit:
    """Fit a GLM by repeated passes over ``src`` per the module recipe.

    Raises SourceExhaustedEarly when a repeat pass sees a different row
    count than the first, the detectable symptom of a non-replayable
    source. On reaching max_iter the last iterate is returned with
    converged=False rather than raising; callers inspect the flag.
    """
    if cfg.family == "gaussian-identity":
        return _fit_gaussian(src, cfg)
    return _fit_binomial(src, cfg)


def _fit_gaussian(src: ChunkSource, cfg: GlmConfig) -> GlmFit:
    acc = None
    yty = 0.0
    n = 0
    rejected = 0
    reset = True
    while True:
        x, y = src.next_chunk(reset=reset)
        reset = False
        if x.shape[0] == 0:
            break
        x, y, bad = _clean_chunk(x, y, acc)
        rejected += bad
        if x.shape[0] == 0:
            continue
        if acc is None:
            acc = _make_acc(x.shape[1], cfg)
        w = np.ones(x.shape[0])
        acc.absorb(x, w, y)
        yty += float(y @ y)
        n += x.shape[0]
    if n == 0:
        raise EmptyInput("source yielded no usable rows")
    beta, deficient = acc.solve()
    g = acc.gram()
    if cfg.use_qr:
        deviance = max(acc.state.rss, 0.0)
    else:
        deviance = max(yty - 2.0 * float(beta @ acc.b) + float(beta @ g @ beta), 0.0)
    return GlmFit(
        beta=beta,
        se=np.sqrt(np.clip(np.diag(pseudo_inverse(g)), 0.0, None)),
        deviance=deviance,
        iterations=1,
        n=n,
        converged=True,
        rank_deficient=deficient,
        n_rejected=rejected,
    )


def _fit_binomial(src: ChunkSource, cfg: GlmConfig) -> GlmFit:
    beta: NDArray[np.float64] | None = None
    beta_prev: NDArray[np.float64] | None = None
    dev_prev: float | None = None
    solves = 0
    halvings = 0
    rank_deficient = False
    n_expected: int | None = None
    rej_expected = 0
    while True:
        acc, dev, n, rejected = _binomial_pass(src, cfg, beta)
        if n == 0:
            raise EmptyInput("source yielded no usable rows")
        if n_expected is None:
            n_expected, rej_expected = n, rejected
        elif n != n_expected or rejected != rej_expected:
            raise SourceExhaustedEarly(
                f"replay yielded {n} usable rows, first pass had {n_expected}"
            )
        if beta is not None and dev_prev is not None:
            if abs(dev - dev_prev) / (abs(dev) + 0.1) < cfg.tol:
                return _finish(acc, beta, dev, solves, n, True, rank_deficient, rejected)
            if dev > dev_prev and beta_prev is not None and halvings < 5:
                logger.warning(
                    "deviance rose from %g to %g; halving the last step", dev_prev, dev
                )
                beta = 0.5 * (beta + beta_prev)
                halvings += 1
                continue
            halvings = 0
        if beta is not None:
            dev_prev = dev
        if solves >= cfg.max_iter:
            return _finish(acc, beta, dev, solves, n, False, rank_deficient, rejected)
        beta_prev = beta
        beta, deficient = acc.solve()
        rank_deficient = rank_deficient or deficient
        solves += 1


def _finish(acc, beta, dev, solves, n, converged, rank_deficient, rejected) -> GlmFit:
    g = acc.gram()
    return GlmFit(
        beta=beta,
        se=np.sqrt(np.clip(np.diag(pseudo_inverse(g)), 0.0, None)),
        deviance=dev,
        iterations=solves,
        n=n,
        converged=converged,
        rank_deficient=rank_deficient,
        n_rejected=rejected,
    )


def _binomial_pass(src: ChunkSource, cfg: GlmConfig, beta):
    """One full pass: working-response accumulation plus deviance at ``beta``.

    With beta still unset the working quantities come from the standard
    per-observation start mu = (y + 0.5) / 2, and the reported deviance is
    a placeholder never used for convergence.
    """
    acc = None
    dev = 0.0
    n = 0
    rejected = 0
    reset = True
    while True:
        cx, cy = src.next_chunk(reset=reset)
        reset = False
        if cx.shape[0] == 0:
            break
        x, y, bad = _clean_chunk(cx, cy, acc)
        rejected += bad
        if x.shape[0] == 0:
            continue
        if acc is None:
            acc = _make_acc(x.shape[1], cfg)
        if beta is None:
            mu = (y + 0.5) / 2.0
            eta = np.log(mu / (1.0 - mu))
        else:
            eta = x @ beta
            mu = _expit(eta)
            dev += 2.0 * float(np.sum(np.logaddexp(0.0, eta) - y * eta))
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        z = eta + (y - mu) / w
        acc.absorb(x, w, z)
        n += x.shape[0]
    return acc, dev, n, rejected


def _clean_chunk(x, y, acc):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"chunk shapes {x.shape} and {y.shape} do not align")
    if acc is not None and x.shape[1] != acc.gram().shape[0]:
        raise DimensionMismatch(
            f"chunk width {x.shape[1]} differs from earlier chunks"
        )
    keep = np.isfinite(x).all(axis=1) & np.isfinite(y)
    bad = int(x.shape[0] - keep.sum())
    if bad:
        x, y = x[keep], y[keep]
    if x.shape[0] and not np.all(x[:, 0] == 1.0):
        raise ValueError("first design column must be the intercept (all ones)")
    return x, y, bad


def _make_acc(q: int, cfg: GlmConfig):
    return _GivensAcc(q) if cfg.use_qr else _CrossProdAcc(q)


def _expit(eta: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def start_values(src: ChunkSource, family: str) -> NDArray[np.float64]:
    """Intercept from the link-transformed grand mean, zero slopes."""
    family = _FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    total = 0.0
    n = 0
    width = None
    reset = True
    while True:
        x, y = src.next_chunk(reset=reset)
        reset = False
        if x.shape[0] == 0:
            break
        keep = np.isfinite(np.asarray(x, dtype=np.float64)).all(axis=1)
        keep &= np.isfinite(np.asarray(y, dtype=np.float64))
        width = x.shape[1]
        total += float(np.sum(np.asarray(y)[keep]))
        n += int(keep.sum())
    if n == 0:
        raise EmptyInput("source yielded no usable rows")
    rate = total / n
    out = np.zeros(width)
    if family == "binomial-logit":
        rate = min(max(rate, 1e-10), 1.0 - 1e-10)
        out[0] = np.log(rate / (1.0 - rate))
    else:
        out[0] = rate
    return out
