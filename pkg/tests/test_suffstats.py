import numpy as np
import pytest

from streamreg.errors import DimensionMismatch, EmptyBlock, NonFiniteInput
from streamreg.suffstats import BlockStats, accumulate_chunk, block_ols, merge


def _design(rng, n, p):
    return np.hstack([np.ones((n, 1)), rng.standard_normal((n, p))])


def test_counts_live_in_the_gram_corner():
    rng = np.random.default_rng(0)
    x = _design(rng, 17, 3)
    stats = accumulate_chunk(BlockStats.empty(3), x, rng.standard_normal(17))
    assert stats.n_k == 17
    assert stats.xtx[0, 0] == 17.0


def test_chunking_is_equivalent_to_one_shot():
    rng = np.random.default_rng(1)
    x = _design(rng, 30, 2)
    y = rng.standard_normal(30)
    whole = accumulate_chunk(BlockStats.empty(2), x, y)
    parts = BlockStats.empty(2)
    for lo, hi in ((0, 11), (11, 11), (11, 25), (25, 30)):
        accumulate_chunk(parts, x[lo:hi], y[lo:hi])
    assert parts.n_k == whole.n_k
    assert np.allclose(parts.xtx, whole.xtx, rtol=1e-12, atol=1e-12)
    assert np.allclose(parts.xty, whole.xty, rtol=1e-12, atol=1e-12)
    assert parts.yty == pytest.approx(whole.yty, rel=1e-12)


def test_merge_equals_joint_accumulation():
    rng = np.random.default_rng(2)
    x = _design(rng, 24, 2)
    y = rng.standard_normal(24)
    a = accumulate_chunk(BlockStats.empty(2), x[:10], y[:10])
    b = accumulate_chunk(BlockStats.empty(2), x[10:], y[10:])
    joint = accumulate_chunk(BlockStats.empty(2), x, y)
    merged = merge(a, b)
    assert merged.n_k == joint.n_k
    assert np.allclose(merged.xtx, joint.xtx, rtol=1e-12, atol=1e-12)
    assert np.allclose(merged.xty, joint.xty, rtol=1e-12, atol=1e-12)
    assert merged.yty == pytest.approx(joint.yty, rel=1e-12)
    with pytest.raises(DimensionMismatch):
        merge(a, BlockStats.empty(3))


def test_block_ols_matches_lstsq():
    rng = np.random.default_rng(3)
    x = _design(rng, 50, 3)
    y = x @ np.array([1.0, 2.0, -1.0, 0.5]) + rng.standard_normal(50)
    stats = accumulate_chunk(BlockStats.empty(3), x, y)
    fit = block_ols(stats)
    beta_ref, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta_ref
    assert np.allclose(fit.beta_full, beta_ref, rtol=1e-10, atol=1e-12)
    assert fit.sse_full == pytest.approx(float(resid @ resid), rel=1e-8)
    assert fit.rank == 4


def test_block_ols_rank_deficient_uses_minimum_norm():
    rng = np.random.default_rng(4)
    base = _design(rng, 40, 2)
    x = np.hstack([base, base[:, 2:3]])  # duplicated column
    y = rng.standard_normal(40)
    stats = accumulate_chunk(BlockStats.empty(3), x, y)
    fit = block_ols(stats)
    assert fit.rank == 3
    assert np.isfinite(fit.beta_full).all()
    # fitted values still reproduce the least-squares projection
    beta_ref, *_ = np.linalg.lstsq(x, y, rcond=None)
    assert np.allclose(x @ fit.beta_full, x @ beta_ref, rtol=1e-8, atol=1e-8)


def test_block_ols_empty_raises():
    with pytest.raises(EmptyBlock):
        block_ols(BlockStats.empty(2))


def test_validation_errors():
    stats = BlockStats.empty(2)
    rng = np.random.default_rng(5)
    with pytest.raises(DimensionMismatch):
        accumulate_chunk(stats, np.ones((4, 2)), np.ones(4))
    with pytest.raises(DimensionMismatch):
        accumulate_chunk(stats, np.ones((4, 3)), np.ones(5))
    bad = _design(rng, 4, 2)
    bad[1, 2] = np.nan
    with pytest.raises(NonFiniteInput):
        accumulate_chunk(stats, bad, np.ones(4))
    no_intercept = rng.standard_normal((4, 3))
    with pytest.raises(ValueError, match="intercept"):
        accumulate_chunk(stats, no_intercept, np.ones(4))
    # zero-row chunk is a no-op, not an error
    before = stats.n_k
    accumulate_chunk(stats, np.empty((0, 3)), np.empty(0))
    assert stats.n_k == before
