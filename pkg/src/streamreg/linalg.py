"""Dense symmetric linear algebra shared by the estimators.

Symmetric matrices are plain float64 ndarrays stored as full squares; vectors
are 1-d float64 ndarrays. Solves prefer Cholesky and signal rank trouble with
:class:`~streamreg.errors.NotPositiveDefinite` so callers can switch to the
pseudo-inverse path, mirroring how the cumulative estimators fall back to a
generalized inverse when a stream starts rank deficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .errors import DimensionMismatch, NotPositiveDefinite

__all__ = [
    "solve_spd",
    "pseudo_inverse",
    "QrState",
    "incremental_qr_update",
    "qr_solve",
    "qr_gram",
]

_EPS = float(np.finfo(np.float64).eps)


def _as_square(a) -> NDArray[np.float64]:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def solve_spd(a, b) -> NDArray[np.float64]:
    """Solve a x = b for symmetric positive definite a.

    Args:
        a: symmetric positive definite matrix, shape (d, d).
        b: right-hand side, length d.

    Returns:
        The solution vector x. Inputs are not modified.

    Raises:
        NotPositiveDefinite: a Cholesky pivot fell at or below
            d * eps * max(diag), signalling the caller to fall back to
            ``pseudo_inverse``.
        DimensionMismatch: incompatible shapes.
    """
    a = _as_square(a)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.ndim != 1 or b.shape[0] != a.shape[0]:
        raise DimensionMismatch(
            f"right-hand side has length {b.shape}, matrix is {a.shape[0]}x{a.shape[0]}"
        )
    x, ok = _kernels.chol_solve(a, b)
    if not ok:
        raise NotPositiveDefinite(
            "Cholesky pivot at or below tolerance; matrix is not positive "
            "definite to working precision"
        )
    return x


def pseudo_inverse(a) -> NDArray[np.float64]:
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Eigenvalues with magnitude below d * eps * max|eigenvalue| are treated as
    zero, so rank-deficient input yields the minimum-norm generalized inverse.
    Total on symmetric input: never raises for any symmetric a.
    """
    a = _as_square(a)
    w, q = np.linalg.eigh(a)
    cutoff = a.shape[0] * _EPS * float(np.max(np.abs(w), initial=0.0))
    winv = np.where(np.abs(w) > cutoff, np.divide(1.0, w, where=w != 0.0), 0.0)
    out = (q * winv) @ q.T
    return 0.5 * (out + out.T)


@dataclass
class QrState:
    """Upper-triangular R and Q'y accumulated one weighted row at a time.

    The slower but better-conditioned alternative to cross-product
    accumulation: after absorbing rows, ``qr_solve`` reproduces the weighted
    least-squares coefficients without ever forming X'WX.
    """

    dim: int
    r: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    qty: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    n: int = 0
    rss: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DimensionMismatch("QrState needs dim >= 1")
        if self.r is None:
            self.r = np.zeros((self.dim, self.dim))
        if self.qty is None:
            self.qty = np.zeros(self.dim)


def incremental_qr_update(state: QrState, row, weight: float, y: float) -> QrState:
    """Absorb one observation with nonnegative weight via Givens rotations.

    Mutates ``state`` in place and returns it. After n rows, solving
    R beta = Q'y reproduces weighted least squares on those rows.
    """
    row = np.array(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != state.dim:
        raise DimensionMismatch(
            f"row has length {row.shape}, state dimension is {state.dim}"
        )
    if not weight >= 0.0:
        raise ValueError(f"weight must be nonnegative, got {weight}")
    if weight > 0.0:
        sw = float(np.sqrt(weight))
        res = _kernels.givens_absorb(state.r, state.qty, sw * row, sw * float(y))
        state.rss += res * res
    state.n += 1
    return state


def qr_solve(state: QrState) -> NDArray[np.float64]:
    """Back-substitute R beta = Q'y.

    A zero diagonal entry marks a column never touched by the data (or exactly
    collinear); its coefficient is set to 0, the usual aliasing convention.
    """
    d = state.dim
    beta = np.zeros(d)
    for i in range(d - 1, -1, -1):
        rii = state.r[i, i]
        if rii == 0.0:
            continue
        beta[i] = (state.qty[i] - state.r[i, i + 1 :] @ beta[i + 1 :]) / rii
    return beta


def qr_gram(state: QrState) -> NDArray[np.float64]:
    """Reconstruct X'WX = R'R from the triangular factor."""
    g = state.r.T @ state.r
    return 0.5 * (g + g.T)
