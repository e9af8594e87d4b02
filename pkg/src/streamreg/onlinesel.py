"""Streaming variable selection over all candidate submodels.

For p covariates (intercept always included) there are 2**p candidate
models, one per inclusion mask. Each model keeps three running quantities:
a Gram matrix V, a projected response vector A, and a residual sum of
squares. When a new block arrives, its full-model cross-products update
every candidate in one sweep:

    V_new   = V_old + X'X restricted to the model's columns
    A_new   = A_old + (X'X b_full) restricted, where b_full is the block's
              full-model OLS solution
    beta    = V_new^{-1} A_new
    SSE_new = SSE_old + SSE_block_full
              + b_full' X'X b_full
              + beta_old' V_old beta_old - beta' V_new beta

These recursions reproduce, exactly, the fit each submodel would get from
all rows seen so far, because the block's full-model residual is orthogonal
to every column of the design. Cumulative raw data never has to exist in
one place; the state is (2**p) small matrices.

Information criteria computed from the running state:

    base = n * log(2 * pi * SSE / (n - p_m - 1))
    AIC  = base + n + p_m + 1
    BIC  = base + n - p_m - 1 + (p_m + 1) * log(n)
    DIC  = n * log(pi * (n - 2) * SSE / 2) + 2 * n * psi(n / 2)
           + 2 * p_m + n + 4

where p_m counts the covariates in the model (intercept excluded) and psi
is the digamma function. Lower is better for all three.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _kernels as kernels
from ._accel import NUMBA_ENABLED
from .errors import (
    DimensionMismatch,
    EmptyBlock,
    InsufficientData,
    TooManyCovariates,
)
from .linalg import pseudo_inverse
from .special import digamma
from .suffstats import BlockStats, block_ols

__all__ = [
    "MODEL_CAP",
    "enumerate_models",
    "mask_columns",
    "mask_label",
    "criterion_values",
    "ModelState",
    "CriterionReport",
    "StreamState",
    "save_snapshot",
    "load_snapshot",
]

MODEL_CAP = 20

_SNAPSHOT_FORMAT = "streamreg-stream-snapshot"
_SNAPSHOT_VERSION = 1


def enumerate_models(p: int) -> list[int]:
    """All inclusion masks for p covariates, ascending (0 = intercept only).

    Bit j of a mask selects covariate j+1 (design column j+1); the intercept
    is implicit in every model. Capped at MODEL_CAP covariates because the
    state grows as 2**p.
    """
    if p < 1:
        raise ValueError(f"need at least one covariate, got p={p}")
    if p > MODEL_CAP:
        raise TooManyCovariates(f"p={p} exceeds the {MODEL_CAP}-covariate cap")
    return list(range(1 << p))


def mask_columns(mask: int, p: int) -> tuple[int, ...]:
    """Design column indices for a mask: intercept 0, then selected covariates."""
    if not 0 <= mask < (1 << p):
        raise ValueError(f"mask {mask} out of range for p={p}")
    return (0,) + tuple(j + 1 for j in range(p) if mask >> j & 1)


def mask_label(mask: int, p: int, names: Sequence[str] | None = None) -> str:
    """Human-readable covariate list, e.g. 'x1,x3'; 'none' for intercept only."""
    if names is None:
        names = [f"x{j + 1}" for j in range(p)]
    picked = [names[j] for j in range(p) if mask >> j & 1]
    return ",".join(picked) if picked else "none"


def criterion_values(n: int, p_m: int, sse: float) -> tuple[float, float, float]:
    """(AIC, BIC, DIC) for one model; requires n > p_m + 1, n > 2, sse > 0.

    The arithmetic here is decomposed exactly as in StreamState.criteria so
    the two agree bit for bit given the same (n, p_m, sse).
    """
    base = n * np.log(2.0 * np.pi * sse / (n - p_m - 1))
    aic = base + n + p_m + 1
    bic = base + n - p_m - 1 + (p_m + 1) * np.log(n)
    dic_base = n * np.log(np.pi * (n - 2) / 2.0) + 2.0 * n * digamma(n / 2.0) + n + 4.0
    dic = dic_base + n * np.log(sse) + 2.0 * p_m
    return float(aic), float(bic), float(dic)


@dataclass(frozen=True)
class ModelState:
    """Copy of one candidate model's running state."""

    mask: int
    columns: tuple[int, ...]
    v: NDArray[np.float64]
    a: NDArray[np.float64]
    beta: NDArray[np.float64]
    sse: float


@dataclass(frozen=True)
class CriterionReport:
    """Criterion values for every candidate after some number of blocks.

    Arrays are indexed by mask. Models whose running SSE collapsed to zero
    (a perfect fit, so the log-likelihood degenerates) carry NaN in all
    three arrays and are listed in ``degenerate``; when any exist, the
    smallest such mask is reported as best under every criterion.
    """

    p: int
    n: int
    blocks: int
    masks: tuple[int, ...]
    aic: NDArray[np.float64]
    bic: NDArray[np.float64]
    dic: NDArray[np.float64]
    degenerate: tuple[int, ...]
    best_aic: int
    best_bic: int
    best_dic: int


class StreamState:
    """Running selection state over all 2**p candidate models.

    Candidate states live in padded arrays (one slab per model, leading
    dims[m] entries active) so a single compiled sweep can update all of
    them per block. Updates go through the accelerated kernel when the
    numba backend is on, and through an equivalent numpy loop otherwise;
    both fall back to the pseudo-inverse for a candidate whose Gram matrix
    is not yet positive definite, so early blocks with n < p + 1 are fine.
    """

    def __init__(self, p: int):
        self.masks = tuple(enumerate_models(p))
        self.p = p
        self.n = 0
        self.blocks = 0
        m = len(self.masks)
        q = p + 1
        self._dims = np.array([mask.bit_count() + 1 for mask in self.masks], np.int64)
        self._cols = np.zeros((m, q), np.int64)
        for mask in self.masks:
            cols = mask_columns(mask, p)
            self._cols[mask, : len(cols)] = cols
        self._v = np.zeros((m, q, q))
        self._a = np.zeros((m, q))
        self._beta = np.zeros((m, q))
        self._sse = np.zeros(m)
        # scratch for the kernel sweep; never serialized
        self._quad_old = np.zeros(m)
        self._ok = np.zeros(m, np.bool_)

    def update(self, block: BlockStats) -> "StreamState":
        """Absorb one block's cross-products into every candidate model."""
        if block.p != self.p:
            raise DimensionMismatch(f"block has p={block.p}, state has p={self.p}")
        if block.n_k == 0:
            raise EmptyBlock("cannot update from an empty block")
        fit = block_ols(block)
        xtx = np.ascontiguousarray(block.xtx)
        xb = np.ascontiguousarray(xtx @ fit.beta_full)
        quad_full = float(fit.beta_full @ xb)
        if NUMBA_ENABLED:
            kernels.sweep_update(
                self._v, self._a, self._beta, self._sse,
                self._cols, self._dims, xtx, xb,
                quad_full, fit.sse_full, self._quad_old, self._ok,
            )
            for mask in np.flatnonzero(~self._ok):
                self._repair(int(mask), quad_full, fit.sse_full)
        else:
            self._update_numpy(xtx, xb, quad_full, fit.sse_full)
        self.n += block.n_k
        self.blocks += 1
        return self

    def _update_numpy(
        self,
        xtx: NDArray[np.float64],
        xb: NDArray[np.float64],
        quad_full: float,
        sse_full: float,
    ) -> None:
        for mask in self.masks:
            d = int(self._dims[mask])
            idx = self._cols[mask, :d]
            v = self._v[mask, :d, :d]
            beta_old = self._beta[mask, :d]
            carried = v @ beta_old
            self._quad_old[mask] = float(beta_old @ carried)
            v += xtx[np.ix_(idx, idx)]
            self._a[mask, :d] = xb[idx] + carried
            beta, ok = kernels.chol_solve(v, self._a[mask, :d])
            if not ok:
                self._repair(mask, quad_full, sse_full)
                continue
            quad_new = beta @ v @ beta
            self._beta[mask, :d] = beta
            self._sse[mask] = max(
                sse_full + quad_full + self._quad_old[mask] - quad_new + self._sse[mask],
                0.0,
            )

    def _repair(self, mask: int, quad_full: float, sse_full: float) -> None:
        """Recompute one candidate through the pseudo-inverse.

        The sweep has already advanced v and a and stashed beta_old' V_old
        beta_old; beta and sse still hold the pre-update values.
        """
        d = int(self._dims[mask])
        v = self._v[mask, :d, :d]
        beta = pseudo_inverse(v) @ self._a[mask, :d]
        quad_new = beta @ v @ beta
        self._beta[mask, :d] = beta
        self._sse[mask] = max(
            sse_full + quad_full + self._quad_old[mask] - quad_new + self._sse[mask],
            0.0,
        )

    def model_state(self, mask: int) -> ModelState:
        """Copy of one candidate's (V, A, beta, SSE)."""
        d = int(self._dims[mask])
        return ModelState(
            mask=mask,
            columns=mask_columns(mask, self.p),
            v=self._v[mask, :d, :d].copy(),
            a=self._a[mask, :d].copy(),
            beta=self._beta[mask, :d].copy(),
            sse=float(self._sse[mask]),
        )

    def criteria(self) -> CriterionReport:
        """Score every candidate with AIC, BIC and DIC at the current n.

        Raises InsufficientData until n exceeds both p + 1 and 2, the
        points where the largest model's residual variance and the DIC's
        n - 2 factor become well defined.
        """
        n = self.n
        if n <= self.p + 1 or n <= 2:
            raise InsufficientData(
                f"criteria need n > max(p + 1, 2) observations, have n={n}"
            )
        m = len(self.masks)
        aic = np.full(m, np.nan)
        bic = np.full(m, np.nan)
        dic = np.full(m, np.nan)
        degenerate = []
        psi_half_n = digamma(n / 2.0)
        log_n = np.log(n)
        dic_base = n * np.log(np.pi * (n - 2) / 2.0) + 2.0 * n * psi_half_n + n + 4.0
        for mask in self.masks:
            sse = float(self._sse[mask])
            if sse <= 0.0:
                degenerate.append(mask)
                continue
            p_m = int(self._dims[mask]) - 1
            base = n * np.log(2.0 * np.pi * sse / (n - p_m - 1))
            aic[mask] = base + n + p_m + 1
            bic[mask] = base + n - p_m - 1 + (p_m + 1) * log_n
            dic[mask] = dic_base + n * np.log(sse) + 2.0 * p_m
        if degenerate:
            best = degenerate[0]
            best_aic = best_bic = best_dic = best
        else:
            best_aic = int(np.argmin(aic))
            best_bic = int(np.argmin(bic))
            best_dic = int(np.argmin(dic))
        return CriterionReport(
            p=self.p,
            n=n,
            blocks=self.blocks,
            masks=self.masks,
            aic=aic,
            bic=bic,
            dic=dic,
            degenerate=tuple(degenerate),
            best_aic=best_aic,
            best_bic=best_bic,
            best_dic=best_dic,
        )

    def cumulative_variance(self, mask: int) -> NDArray[np.float64]:
        """Estimated covariance of one candidate's coefficients.

        (SSE / (n - p_m - 1)) * V^+, the classical OLS covariance assembled
        from the running state. Exact for the data seen so far.
        """
        if not 0 <= mask < len(self.masks):
            raise ValueError(f"mask {mask} out of range for p={self.p}")
        d = int(self._dims[mask])
        p_m = d - 1
        if self.n <= p_m + 1:
            raise InsufficientData(
                f"variance for mask {mask} needs n > {p_m + 1}, have n={self.n}"
            )
        sigma2 = float(self._sse[mask]) / (self.n - p_m - 1)
        return sigma2 * pseudo_inverse(self._v[mask, :d, :d])

    def to_snapshot(self) -> dict:
        """JSON-ready dict of the full state, models in ascending mask order."""
        return {
            "format": _SNAPSHOT_FORMAT,
            "version": _SNAPSHOT_VERSION,
            "p": self.p,
            "n": self.n,
            "blocks": self.blocks,
            "models": [
                {
                    "mask": mask,
                    "v": self._v[mask, : self._dims[mask], : self._dims[mask]].tolist(),
                    "a": self._a[mask, : self._dims[mask]].tolist(),
                    "beta": self._beta[mask, : self._dims[mask]].tolist(),
                    "sse": float(self._sse[mask]),
                }
                for mask in self.masks
            ],
        }

    @classmethod
    def from_snapshot(cls, payload: dict) -> "StreamState":
        if payload.get("format") != _SNAPSHOT_FORMAT:
            raise ValueError(f"not a stream snapshot: {payload.get('format')!r}")
        if payload.get("version") != _SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {payload.get('version')!r}")
        state = cls(int(payload["p"]))
        state.n = int(payload["n"])
        state.blocks = int(payload["blocks"])
        models = payload["models"]
        if len(models) != len(state.masks):
            raise ValueError(
                f"snapshot has {len(models)} models, expected {len(state.masks)}"
            )
        for entry in models:
            mask = int(entry["mask"])
            d = int(state._dims[mask])
            state._v[mask, :d, :d] = np.asarray(entry["v"], dtype=np.float64)
            state._a[mask, :d] = np.asarray(entry["a"], dtype=np.float64)
            state._beta[mask, :d] = np.asarray(entry["beta"], dtype=np.float64)
            state._sse[mask] = float(entry["sse"])
        return state


def save_snapshot(state: StreamState, path: str) -> None:
    """Write the stream state to ``path`` as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state.to_snapshot(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_snapshot(path: str) -> StreamState:
    """Rebuild a StreamState written by save_snapshot."""
    with open(path, encoding="utf-8") as fh:
        return StreamState.from_snapshot(json.load(fh))
