"""Hot numeric kernels, numba-compiled when the backend allows.

Everything here operates on plain float64/int64 arrays so the same source runs
compiled or uncompiled. The streaming-selection kernels use a padded layout:
for M enumerated submodels over a full design of width q = p + 1, state arrays
are shaped (M, q, q) / (M, q) with only the leading dims[m] rows/columns of
slot m active, and cols[m, :dims[m]] holding the full-design column indices of
that submodel (index 0, the intercept, always first).
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

_EPS = 2.220446049250313e-16

# digamma asymptotic series: coefficients of x**(-2k) are B_{2k} / (2k)
_DG_C1 = 1.0 / 12.0
_DG_C2 = -1.0 / 120.0
_DG_C3 = 1.0 / 252.0
_DG_C4 = -1.0 / 240.0
_DG_C5 = 1.0 / 132.0
_DG_C6 = -691.0 / 32760.0
_DG_C7 = 1.0 / 12.0
_DG_C8 = -3617.0 / 8160.0


@njit(cache=True)
def digamma_kernel(x: float) -> float:
    """Digamma for x > 0: upward recurrence to x >= 6, then the 8-term series."""
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    z = inv * inv
    ser = _DG_C8
    ser = _DG_C7 + z * ser
    ser = _DG_C6 + z * ser
    ser = _DG_C5 + z * ser
    ser = _DG_C4 + z * ser
    ser = _DG_C3 + z * ser
    ser = _DG_C2 + z * ser
    ser = _DG_C1 + z * ser
    return acc + math.log(x) - 0.5 * inv - z * ser


@njit(cache=True)
def _chol_solve_ws(a, d, b, low, x) -> bool:
    """Solve the leading d-by-d system a x = b into x via Cholesky.

    low is (>=d, >=d) scratch. Returns False when a pivot falls at or below
    d * eps * max(|diag|), the rank-deficiency trigger.
    """
    maxdiag = 0.0
    for i in range(d):
        v = abs(a[i, i])
        if v > maxdiag:
            maxdiag = v
    tol = d * _EPS * maxdiag
    for j in range(d):
        s = a[j, j]
        for k in range(j):
            s -= low[j, k] * low[j, k]
        if s <= tol:
            return False
        ljj = math.sqrt(s)
        low[j, j] = ljj
        for i in range(j + 1, d):
            t = a[i, j]
            for k in range(j):
                t -= low[i, k] * low[j, k]
            low[i, j] = t / ljj
    for i in range(d):
        s = b[i]
        for j in range(i):
            s -= low[i, j] * x[j]
        x[i] = s / low[i, i]
    for i in range(d - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, d):
            s -= low[j, i] * x[j]
        x[i] = s / low[i, i]
    return True


@njit(cache=True)
def chol_solve(a, b):
    """Cholesky solve with pivot tolerance; returns (x, ok)."""
    d = a.shape[0]
    low = np.zeros((d, d))
    x = np.zeros(d)
    ok = _chol_solve_ws(a, d, b, low, x)
    return x, ok


@njit(cache=True)
def sweep_update(
    v, a, beta, sse, cols, dims, xtx, xb, quad_full, sse_full, quad_old, ok
):
    """Advance every submodel's cumulative state by one block.

    xtx is the block's full-design Gram matrix, xb = xtx @ beta_full, quad_full
    = beta_full' xtx beta_full and sse_full the block's full-model residual sum
    of squares. v and a are always updated in place; beta[m] and sse[m] are
    written only when the Cholesky solve succeeds (ok[m] set accordingly, the
    caller repairs failed slots through the pseudo-inverse path using a[m] and
    quad_old[m], the pre-update quadratic form beta' v beta).
    """
    q = v.shape[1]
    nmodels = dims.shape[0]
    low = np.zeros((q, q))
    tmp = np.zeros(q)
    bnew = np.zeros(q)
    for m in range(nmodels):
        d = dims[m]
        qo = 0.0
        for i in range(d):
            s = 0.0
            for j in range(d):
                s += v[m, i, j] * beta[m, j]
            tmp[i] = s
            qo += beta[m, i] * s
        quad_old[m] = qo
        for i in range(d):
            ci = cols[m, i]
            for j in range(d):
                v[m, i, j] += xtx[ci, cols[m, j]]
            a[m, i] = xb[ci] + tmp[i]
        if not _chol_solve_ws(v[m], d, a[m], low, bnew):
            ok[m] = False
            continue
        qn = 0.0
        for i in range(d):
            s = 0.0
            for j in range(d):
                s += v[m, i, j] * bnew[j]
            qn += bnew[i] * s
        snew = sse_full + quad_full + qo - qn + sse[m]
        if snew < 0.0:
            snew = 0.0
        for i in range(d):
            beta[m, i] = bnew[i]
        sse[m] = snew
        ok[m] = True


@njit(cache=True)
def criterion_picks(dims, sse, n, out):
    """Best-mask indices (AIC, BIC, DIC) into out[0:3].

    Models are in ascending mask order, so taking the first strict minimum
    breaks ties toward the smallest mask. Any model with sse == 0 wins
    outright (perfect fit), again smallest mask first.
    """
    nmodels = dims.shape[0]
    for m in range(nmodels):
        if sse[m] <= 0.0:
            out[0] = m
            out[1] = m
            out[2] = m
            return
    nf = float(n)
    psi = digamma_kernel(nf / 2.0)
    ln_n = math.log(nf)
    best_aic = math.inf
    best_bic = math.inf
    best_dic = math.inf
    for m in range(nmodels):
        pm = float(dims[m] - 1)
        base = nf * math.log(2.0 * math.pi * sse[m] / (nf - pm - 1.0))
        aic = base + nf + pm + 1.0
        bic = base + nf - pm - 1.0 + (pm + 1.0) * ln_n
        dic = (
            nf * math.log(math.pi * (nf - 2.0) * sse[m] / 2.0)
            + 2.0 * nf * psi
            + 2.0 * pm
            + nf
            + 4.0
        )
        if aic < best_aic:
            best_aic = aic
            out[0] = m
        if bic < best_bic:
            best_bic = bic
            out[1] = m
        if dic < best_dic:
            best_dic = dic
            out[2] = m


@njit(cache=True)
def run_replicate(x, y, n_k, checkpoints, cols, dims, picks):
    """Stream one replicate's blocks through the selection sweep.

    x is (K * n_k, q) with the intercept column first, checkpoints an ascending
    int64 array of block counts at which criterion picks are recorded into
    picks[(checkpoint index), 0:3]. Returns 0, or the 1-based block index at
    which a full-model Gram solve failed (caller falls back to the slow path).
    """
    q = x.shape[1]
    nmodels = dims.shape[0]
    v = np.zeros((nmodels, q, q))
    a = np.zeros((nmodels, q))
    beta = np.zeros((nmodels, q))
    sse = np.zeros(nmodels)
    quad_old = np.zeros(nmodels)
    ok = np.zeros(nmodels, dtype=np.bool_)
    xtx = np.zeros((q, q))
    xty = np.zeros(q)
    xb = np.zeros(q)
    bfull = np.zeros(q)
    low = np.zeros((q, q))
    kmax = checkpoints[checkpoints.shape[0] - 1]
    n = 0
    cp = 0
    for k in range(kmax):
        base = k * n_k
        for i in range(q):
            xty[i] = 0.0
            for j in range(q):
                xtx[i, j] = 0.0
        yty = 0.0
        for t in range(base, base + n_k):
            yt = y[t]
            yty += yt * yt
            for i in range(q):
                xi = x[t, i]
                xty[i] += xi * yt
                for j in range(i, q):
                    xtx[i, j] += xi * x[t, j]
        for i in range(q):
            for j in range(i):
                xtx[i, j] = xtx[j, i]
        if not _chol_solve_ws(xtx, q, xty, low, bfull):
            return k + 1
        quad_full = 0.0
        for i in range(q):
            s = 0.0
            for j in range(q):
                s += xtx[i, j] * bfull[j]
            xb[i] = s
            quad_full += bfull[i] * s
        sse_full = yty - quad_full
        if sse_full < 0.0:
            sse_full = 0.0
        sweep_update(
            v, a, beta, sse, cols, dims, xtx, xb, quad_full, sse_full, quad_old, ok
        )
        for m in range(nmodels):
            if not ok[m]:
                return k + 1
        n += n_k
        if cp < checkpoints.shape[0] and k + 1 == checkpoints[cp]:
            criterion_picks(dims, sse, n, picks[cp])
            cp += 1
    return 0


@njit(cache=True)
def givens_absorb(r, qty, xrow, yval) -> float:
    """Rotate one scaled observation into the R / Q'y state in place.

    xrow is consumed (zeroed as it is eliminated). Returns the residual y
    component left after elimination; its square is the row's contribution to
    the residual sum of squares.
    """
    d = r.shape[0]
    for i in range(d):
        xi = xrow[i]
        if xi == 0.0:
            continue
        rii = r[i, i]
        if rii == 0.0:
            for j in range(i, d):
                r[i, j] = xrow[j]
                xrow[j] = 0.0
            qty[i] = yval
            return 0.0
        rho = math.hypot(rii, xi)
        c = rii / rho
        s = xi / rho
        r[i, i] = rho
        xrow[i] = 0.0
        for j in range(i + 1, d):
            rij = r[i, j]
            xj = xrow[j]
            r[i, j] = c * rij + s * xj
            xrow[j] = c * xj - s * rij
        t = c * qty[i] + s * yval
        yval = c * yval - s * qty[i]
        qty[i] = t
    return yval


@njit(cache=True)
def givens_absorb_chunk(r, qty, x, z, w) -> float:
    """Absorb a whole chunk of weighted rows; returns the added residual SS."""
    d = r.shape[0]
    row = np.zeros(d)
    rss = 0.0
    for t in range(x.shape[0]):
        wt = w[t]
        if wt <= 0.0:
            continue
        sw = math.sqrt(wt)
        for j in range(d):
            row[j] = sw * x[t, j]
        res = givens_absorb(r, qty, row, sw * z[t])
        rss += res * res
    return rss
