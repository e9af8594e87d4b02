"""Divide and conquer: fit blocks independently, combine by information weight.

Each block contributes its estimate and the slope matrix of its estimating
function at that estimate (X'X for linear regression, X'WX at the MLE for
logistic). The combined estimate solves

    (sum_k info_k) beta = sum_k (info_k beta_k)

which is exact for linear models under any partition and a first-order
approximation for nonlinear ones, with error shrinking in the block size.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DimensionMismatch,
    EmptyInput,
    NonConvergence,
    NonFiniteInput,
    NotPositiveDefinite,
    SeparationDetected,
)
from .linalg import pseudo_inverse, solve_spd

__all__ = [
    "BlockFit",
    "CombinedFit",
    "combine",
    "fit_block_logistic",
    "save_block_fit",
    "load_block_fit",
]

logger = logging.getLogger(__name__)

_FIT_FORMAT = "streamreg-block-fit"
_FIT_VERSION = 1


@dataclass(frozen=True)
class BlockFit:
    """One block's estimate with its information weight."""

    beta: NDArray[np.float64]
    info: NDArray[np.float64]
    n_k: int


@dataclass(frozen=True)
class CombinedFit:
    """Information-weighted combination of block fits."""

    beta: NDArray[np.float64]
    covariance: NDArray[np.float64]
    n: int
    k_blocks: int


def combine(fits: list[BlockFit]) -> CombinedFit:
    """Weighted average of block estimates, weights = information matrices.

    Order of the fits does not matter. A warning is logged when the block
    count is large relative to the total sample (K > n^0.9), where the
    approximation argument for nonlinear models gets thin.
    """
    if not fits:
        raise EmptyInput("combine needs at least one block fit")
    q = fits[0].beta.shape[0]
    for i, fit in enumerate(fits):
        if fit.beta.shape != (q,) or fit.info.shape != (q, q):
            raise DimensionMismatch(
                f"fit {i} has beta {fit.beta.shape}, info {fit.info.shape}; "
                f"expected ({q},) and ({q}, {q})"
            )
    total_info = np.zeros((q, q))
    rhs = np.zeros(q)
    n = 0
    for fit in fits:
        total_info += fit.info
        rhs += fit.info @ fit.beta
        n += fit.n_k
    if len(fits) > n**0.9:
        logger.warning(
            "combining %d blocks from only %d observations; "
            "block fits may be too noisy to aggregate well",
            len(fits),
            n,
        )
    try:
        beta = solve_spd(total_info, rhs)
    except NotPositiveDefinite:
        beta = pseudo_inverse(total_info) @ rhs
    return CombinedFit(
        beta=beta,
        covariance=pseudo_inverse(total_info),
        n=n,
        k_blocks=len(fits),
    )


def fit_block_logistic(
    x, y, max_iter: int = 25, tol: float = 1e-8
) -> BlockFit:
    """Newton-Raphson logistic MLE on one in-memory block.

    Starts from zero, halves the step when the deviance rises, and reports
    the observed information X'WX evaluated at the solution. Divergence of
    the coefficient norm past 1e3 is treated as separation.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"incompatible shapes {x.shape} and {y.shape}")
    if x.shape[0] == 0:
        raise EmptyInput("block has no rows")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise NonFiniteInput("block contains NaN or infinite values")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("logistic response must be 0/1")

    beta = np.zeros(x.shape[1])
    dev = _deviance(x @ beta, y)
    for _ in range(max_iter):
        eta = x @ beta
        mu = _expit(eta)
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        info = (x * w[:, None]).T @ x
        info = 0.5 * (info + info.T)
        grad = x.T @ (y - mu)
        try:
            step = solve_spd(info, grad)
        except NotPositiveDefinite:
            step = pseudo_inverse(info) @ grad
        candidate = beta + step
        dev_new = _deviance(x @ candidate, y)
        halvings = 0
        while dev_new > dev and halvings < 5:
            step *= 0.5
            candidate = beta + step
            dev_new = _deviance(x @ candidate, y)
            halvings += 1
        beta = candidate
        if np.linalg.norm(beta) > 1e3:
            raise SeparationDetected(
                "coefficients diverged; data are likely separable"
            )
        if abs(dev_new - dev) / (abs(dev_new) + 0.1) < tol:
            dev = dev_new
            break
        dev = dev_new
    else:
        raise NonConvergence(f"no convergence in {max_iter} Newton iterations")

    mu = _expit(x @ beta)
    w = np.clip(mu * (1.0 - mu), 1e-10, None)
    info = (x * w[:, None]).T @ x
    return BlockFit(beta=beta, info=0.5 * (info + info.T), n_k=x.shape[0])


def _expit(eta: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _deviance(eta: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    # -2 log-likelihood; logaddexp keeps large |eta| finite
    return float(2.0 * np.sum(np.logaddexp(0.0, eta) - y * eta))


def save_block_fit(fit: BlockFit, path: str) -> None:
    """Write one block fit to ``path`` as JSON."""
    payload = {
        "format": _FIT_FORMAT,
        "version": _FIT_VERSION,
        "beta": fit.beta.tolist(),
        "info": fit.info.tolist(),
        "n_k": fit.n_k,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_block_fit(path: str) -> BlockFit:
    """Read a block fit written by save_block_fit."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != _FIT_FORMAT:
        raise ValueError(f"not a block-fit file: {payload.get('format')!r}")
    if payload.get("version") != _FIT_VERSION:
        raise ValueError(f"unsupported block-fit version {payload.get('version')!r}")
    return BlockFit(
        beta=np.asarray(payload["beta"], dtype=np.float64),
        info=np.asarray(payload["info"], dtype=np.float64),
        n_k=int(payload["n_k"]),
    )
