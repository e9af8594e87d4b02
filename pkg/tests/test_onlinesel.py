"""The streaming selector against batch least squares, its one real oracle.

Every test that checks numbers builds the reference fit from the raw rows
with numpy's lstsq on the restricted design, so agreement means the running
(V, A, SSE) recursions reproduce what a from-scratch fit would give.
"""

import math

import numpy as np
import pytest

from streamreg.errors import (
    DimensionMismatch,
    EmptyBlock,
    InsufficientData,
    TooManyCovariates,
)
from streamreg.onlinesel import (
    StreamState,
    criterion_values,
    enumerate_models,
    load_snapshot,
    mask_columns,
    mask_label,
    save_snapshot,
)
from streamreg.suffstats import BlockStats, accumulate_chunk


def _stream(rng, p, blocks):
    state = StreamState(p)
    xs, ys = [], []
    for n_k in blocks:
        x = np.hstack([np.ones((n_k, 1)), rng.standard_normal((n_k, p))])
        beta = np.linspace(1.0, -1.0, p + 1)
        y = x @ beta + rng.standard_normal(n_k)
        stats = accumulate_chunk(BlockStats.empty(p), x, y)
        state.update(stats)
        xs.append(x)
        ys.append(y)
    return state, np.vstack(xs), np.concatenate(ys)


def _batch_submodel(x, y, mask, p):
    cols = list(mask_columns(mask, p))
    xm = x[:, cols]
    beta, *_ = np.linalg.lstsq(xm, y, rcond=None)
    resid = y - xm @ beta
    return beta, float(resid @ resid)


def test_enumerate_and_mask_helpers():
    assert enumerate_models(2) == [0, 1, 2, 3]
    assert mask_columns(0, 4) == (0,)
    assert mask_columns(5, 4) == (0, 1, 3)
    assert mask_label(0, 4) == "none"
    assert mask_label(5, 4) == "x1,x3"
    with pytest.raises(TooManyCovariates):
        enumerate_models(21)
    with pytest.raises(ValueError):
        enumerate_models(0)
    with pytest.raises(ValueError):
        mask_columns(16, 4)


def test_stream_matches_batch_for_every_submodel():
    rng = np.random.default_rng(101)
    for trial in range(20):
        p = int(rng.integers(1, 5))
        blocks = [int(rng.integers(p + 2, 40)) for _ in range(int(rng.integers(2, 8)))]
        state, x, y = _stream(rng, p, blocks)
        for mask in range(1 << p):
            beta_ref, sse_ref = _batch_submodel(x, y, mask, p)
            ms = state.model_state(mask)
            assert np.allclose(ms.beta, beta_ref, rtol=1e-8, atol=1e-10), (trial, mask)
            assert ms.sse == pytest.approx(sse_ref, rel=1e-8), (trial, mask)


def test_block_order_does_not_matter():
    rng = np.random.default_rng(55)
    p, n_k = 3, 25
    blocks = []
    for _ in range(6):
        x = np.hstack([np.ones((n_k, 1)), rng.standard_normal((n_k, p))])
        y = x @ np.array([0.5, 1.0, 0.0, -2.0]) + rng.standard_normal(n_k)
        blocks.append(accumulate_chunk(BlockStats.empty(p), x, y))
    forward = StreamState(p)
    backward = StreamState(p)
    for b in blocks:
        forward.update(b)
    for b in reversed(blocks):
        backward.update(b)
    for mask in range(1 << p):
        f, g = forward.model_state(mask), backward.model_state(mask)
        assert np.allclose(f.beta, g.beta, rtol=1e-9, atol=1e-11)
        assert f.sse == pytest.approx(g.sse, rel=1e-9)


def test_tiny_singular_blocks_are_survivable():
    # blocks far smaller than p leave the early Gram matrices singular;
    # the pseudo-inverse path must carry the state until rank builds up
    rng = np.random.default_rng(77)
    p, n_k = 4, 2
    state = StreamState(p)
    xs, ys = [], []
    for _ in range(30):
        x = np.hstack([np.ones((n_k, 1)), rng.standard_normal((n_k, p))])
        y = x @ np.array([1.0, -1.0, 2.0, 0.0, 0.5]) + rng.standard_normal(n_k)
        state.update(accumulate_chunk(BlockStats.empty(p), x, y))
        xs.append(x)
        ys.append(y)
    x, y = np.vstack(xs), np.concatenate(ys)
    for mask in range(16):
        beta_ref, sse_ref = _batch_submodel(x, y, mask, p)
        ms = state.model_state(mask)
        assert np.allclose(ms.beta, beta_ref, rtol=1e-7, atol=1e-9), mask
        assert ms.sse == pytest.approx(sse_ref, rel=1e-7), mask


def test_criterion_values_frozen():
    sp = pytest.importorskip("scipy.special")
    n, p_m, sse = 200, 1, 20000.0
    aic, bic, dic = criterion_values(n, p_m, sse)
    base = n * math.log(2.0 * math.pi * sse / (n - p_m - 1))
    assert aic == pytest.approx(base + n + p_m + 1, rel=1e-12)
    assert bic == pytest.approx(
        base + n - p_m - 1 + (p_m + 1) * math.log(n), rel=1e-12
    )
    dic_ref = (
        n * math.log(math.pi * (n - 2) * sse / 2.0)
        + 2.0 * n * float(sp.digamma(n / 2.0))
        + 2.0 * p_m
        + n
        + 4.0
    )
    assert dic == pytest.approx(dic_ref, rel=1e-12)
    # frozen spot values guard against silent formula drift
    assert aic == pytest.approx(1492.6195176501876, rel=1e-13)
    assert bic == pytest.approx(1499.2161523832838, rel=1e-13)
    assert dic == pytest.approx(5174.732198799259, rel=1e-13)


def test_criteria_report_is_bitwise_consistent_with_criterion_values():
    rng = np.random.default_rng(13)
    state, _, _ = _stream(rng, 3, [30, 30, 30])
    report = state.criteria()
    assert report.n == 90
    assert report.blocks == 3
    for mask in report.masks:
        ms = state.model_state(mask)
        aic, bic, dic = criterion_values(report.n, len(ms.columns) - 1, ms.sse)
        assert report.aic[mask] == aic
        assert report.bic[mask] == bic
        assert report.dic[mask] == dic
    for crit in (report.best_aic, report.best_bic, report.best_dic):
        assert 0 <= crit < 8
    assert report.best_aic == int(np.argmin(report.aic))
    assert report.best_bic == int(np.argmin(report.bic))
    assert report.best_dic == int(np.argmin(report.dic))


def test_strong_signal_selects_true_model():
    rng = np.random.default_rng(17)
    p, n_k = 4, 100
    state = StreamState(p)
    for _ in range(50):
        x = np.hstack([np.ones((n_k, 1)), rng.standard_normal((n_k, p))])
        y = x @ np.array([-1.0, 3.0, 0.0, 0.0, 0.0]) + rng.standard_normal(n_k)
        state.update(accumulate_chunk(BlockStats.empty(p), x, y))
    report = state.criteria()
    assert report.best_bic == 1  # {x1}
    assert mask_label(report.best_bic, p) == "x1"


def test_degenerate_zero_sse_models():
    # crafted block whose response is exactly explained: every submodel's
    # SSE collapses to zero and the smallest mask must win all criteria
    state = StreamState(2)
    stats = BlockStats(
        p=2,
        n_k=5,
        xtx=np.diag([5.0, 4.0, 3.0]),
        xty=np.array([5.0, 0.0, 0.0]),
        yty=5.0,
    )
    state.update(stats)
    report = state.criteria()
    assert report.degenerate == (0, 1, 2, 3)
    assert np.isnan(report.aic).all()
    assert report.best_aic == 0
    assert report.best_bic == 0
    assert report.best_dic == 0


def test_insufficient_data_guard():
    rng = np.random.default_rng(19)
    p = 4
    state = StreamState(p)
    x = np.hstack([np.ones((5, 1)), rng.standard_normal((5, p))])
    y = rng.standard_normal(5)
    state.update(accumulate_chunk(BlockStats.empty(p), x, y))
    with pytest.raises(InsufficientData):
        state.criteria()  # n == p + 1
    with pytest.raises(InsufficientData):
        state.cumulative_variance(15)
    state.update(accumulate_chunk(BlockStats.empty(p), x, y))
    state.criteria()  # n == 10 is enough


def test_cumulative_variance_matches_classical_formula():
    rng = np.random.default_rng(23)
    state, x, y = _stream(rng, 3, [40, 40])
    for mask in (0, 3, 7):
        cols = list(mask_columns(mask, 3))
        xm = x[:, cols]
        beta_ref, *_ = np.linalg.lstsq(xm, y, rcond=None)
        resid = y - xm @ beta_ref
        sigma2 = float(resid @ resid) / (80 - len(cols))
        ref = sigma2 * np.linalg.inv(xm.T @ xm)
        assert np.allclose(state.cumulative_variance(mask), ref, rtol=1e-7, atol=1e-10)


def test_update_validation():
    state = StreamState(3)
    with pytest.raises(DimensionMismatch):
        state.update(BlockStats.empty(2))
    with pytest.raises(EmptyBlock):
        state.update(BlockStats.empty(3))


def test_snapshot_roundtrip_continues_identically(tmp_path):
    rng = np.random.default_rng(29)
    p, n_k = 3, 20
    state = StreamState(p)
    later = []
    for i in range(5):
        x = np.hstack([np.ones((n_k, 1)), rng.standard_normal((n_k, p))])
        y = x @ np.array([2.0, 1.0, -1.0, 0.0]) + rng.standard_normal(n_k)
        stats = accumulate_chunk(BlockStats.empty(p), x, y)
        if i < 3:
            state.update(stats)
        else:
            later.append(stats)
    path = tmp_path / "state.json"
    save_snapshot(state, str(path))
    resumed = load_snapshot(str(path))
    assert resumed.n == state.n
    assert resumed.blocks == state.blocks
    for stats in later:
        state.update(stats)
        resumed.update(stats)
    for mask in range(8):
        a, b = state.model_state(mask), resumed.model_state(mask)
        assert np.array_equal(a.beta, b.beta)
        assert a.sse == b.sse
    ra, rb = state.criteria(), resumed.criteria()
    assert np.array_equal(ra.aic, rb.aic)
    assert ra.best_dic == rb.best_dic


def test_snapshot_rejects_wrong_envelope(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "something-else", "version": 1}')
    with pytest.raises(ValueError, match="snapshot"):
        load_snapshot(str(path))
