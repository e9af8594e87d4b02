import math

import numpy as np
import pytest

from streamreg.chunkglm import (
    ArraySource,
    GlmConfig,
    fit_glm_chunked,
    start_values,
)
from streamreg.errors import EmptyInput, SourceExhaustedEarly
from streamreg.suffstats import BlockStats, accumulate_chunk, block_ols


def _newton_logistic(x, y, iters=60):
    """Independent in-memory reference fit: plain Newton, no halving."""
    beta = np.zeros(x.shape[1])
    for _ in range(iters):
        eta = x @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        grad = x.T @ (y - mu)
        step = np.linalg.solve((x * w[:, None]).T @ x, grad)
        beta = beta + step
        if np.max(np.abs(step)) < 1e-12:
            break
    return beta


def _logit_data(rng, n, p, beta):
    x = np.hstack([np.ones((n, 1)), rng.standard_normal((n, p))])
    eta = x @ beta
    y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return x, y


def test_gaussian_is_single_pass_and_exact():
    rng = np.random.default_rng(0)
    n = 5000
    x = np.hstack([np.ones((n, 1)), rng.standard_normal((n, 3))])
    y = x @ np.array([1.0, -0.5, 2.0, 0.0]) + rng.standard_normal(n)
    fit = fit_glm_chunked(ArraySource(x, y, 700), GlmConfig(family="gaussian"))
    ref = block_ols(accumulate_chunk(BlockStats.empty(3), x, y))
    assert fit.iterations == 1
    assert fit.converged
    assert np.allclose(fit.beta, ref.beta_full, rtol=1e-10, atol=1e-12)
    assert fit.deviance == pytest.approx(ref.sse_full, rel=1e-9)
    assert fit.n == n
    # documented convention: se from the unscaled information matrix
    assert np.allclose(fit.se, np.sqrt(np.diag(np.linalg.inv(x.T @ x))), rtol=1e-8)


def test_logistic_matches_in_memory_newton():
    rng = np.random.default_rng(1)
    x, y = _logit_data(rng, 20_000, 3, np.array([-1.0, 0.8, 0.0, -0.4]))
    fit = fit_glm_chunked(ArraySource(x, y, 1000), GlmConfig(family="binomial"))
    ref = _newton_logistic(x, y)
    assert fit.converged
    assert np.max(np.abs(fit.beta - ref)) < 1e-6
    # reference standard errors from the information matrix at the oracle fit
    mu = 1.0 / (1.0 + np.exp(-(x @ ref)))
    info = (x * (mu * (1 - mu))[:, None]).T @ x
    assert np.allclose(fit.se, np.sqrt(np.diag(np.linalg.inv(info))), rtol=1e-4)


def test_chunk_size_does_not_change_the_answer():
    rng = np.random.default_rng(2)
    x, y = _logit_data(rng, 9000, 2, np.array([0.3, -0.6, 1.1]))
    fits = [
        fit_glm_chunked(ArraySource(x, y, size), GlmConfig(family="binomial"))
        for size in (123, 1000, 9000)
    ]
    for other in fits[1:]:
        assert np.allclose(fits[0].beta, other.beta, rtol=1e-9, atol=1e-11)
        assert fits[0].iterations == other.iterations
        assert fits[0].deviance == pytest.approx(other.deviance, rel=1e-9)


def test_deviance_agrees_with_direct_formula():
    rng = np.random.default_rng(3)
    x, y = _logit_data(rng, 4000, 2, np.array([0.2, 0.5, -0.5]))
    fit = fit_glm_chunked(ArraySource(x, y, 500), GlmConfig(family="binomial"))
    eta = x @ fit.beta
    mu = 1.0 / (1.0 + np.exp(-eta))
    ll = float(np.sum(y * np.log(mu) + (1 - y) * np.log1p(-mu)))
    assert fit.deviance == pytest.approx(-2.0 * ll, rel=1e-9)


def test_qr_path_matches_cross_products():
    rng = np.random.default_rng(4)
    x, y = _logit_data(rng, 1500, 2, np.array([0.1, -0.9, 0.4]))
    base = fit_glm_chunked(ArraySource(x, y, 400), GlmConfig(family="binomial"))
    viaqr = fit_glm_chunked(
        ArraySource(x, y, 400), GlmConfig(family="binomial", use_qr=True)
    )
    assert np.allclose(base.beta, viaqr.beta, rtol=1e-8, atol=1e-10)
    assert np.allclose(base.se, viaqr.se, rtol=1e-7, atol=1e-10)
    yg = x @ np.array([1.0, 0.5, -0.5]) + rng.standard_normal(1500)
    g1 = fit_glm_chunked(ArraySource(x, yg, 400), GlmConfig(family="gaussian"))
    g2 = fit_glm_chunked(
        ArraySource(x, yg, 400), GlmConfig(family="gaussian", use_qr=True)
    )
    assert np.allclose(g1.beta, g2.beta, rtol=1e-9, atol=1e-11)
    assert g1.deviance == pytest.approx(g2.deviance, rel=1e-9)


def test_nonfinite_rows_are_dropped_and_counted():
    rng = np.random.default_rng(5)
    x, y = _logit_data(rng, 2000, 2, np.array([0.0, 1.0, -1.0]))
    xd = x.copy()
    yd = y.copy()
    xd[5, 1] = np.nan
    yd[123] = np.inf
    xd[1500, 2] = -np.inf
    dirty = fit_glm_chunked(ArraySource(xd, yd, 300), GlmConfig(family="binomial"))
    keep = np.ones(2000, bool)
    keep[[5, 123, 1500]] = False
    clean = fit_glm_chunked(
        ArraySource(x[keep], y[keep], 300), GlmConfig(family="binomial")
    )
    assert dirty.n_rejected == 3
    assert dirty.n == 1997
    assert np.allclose(dirty.beta, clean.beta, rtol=1e-12, atol=1e-14)


def test_non_replayable_source_is_caught():
    rng = np.random.default_rng(6)
    x, y = _logit_data(rng, 500, 1, np.array([0.0, 1.0]))

    class Shrinking:
        def __init__(self):
            self.passes = -1
            self.inner = None

        def next_chunk(self, reset=False):
            if reset:
                self.passes += 1
                keep = 500 - 7 * self.passes
                self.inner = ArraySource(x[:keep], y[:keep], 100)
            return self.inner.next_chunk(reset=reset)

    with pytest.raises(SourceExhaustedEarly):
        fit_glm_chunked(Shrinking(), GlmConfig(family="binomial"))


def test_max_iter_returns_unconverged_fit():
    rng = np.random.default_rng(7)
    x, y = _logit_data(rng, 3000, 2, np.array([0.5, 1.5, -2.0]))
    fit = fit_glm_chunked(ArraySource(x, y, 1000), GlmConfig(family="binomial", max_iter=1))
    assert not fit.converged
    assert fit.iterations == 1
    assert np.isfinite(fit.beta).all()


def test_start_values_link_transformed_rate():
    y25 = np.concatenate([np.ones(25), np.zeros(75)])
    x = np.ones((100, 3))
    sv = start_values(ArraySource(x, y25, 40), "binomial")
    assert sv[0] == pytest.approx(math.log(1.0 / 3.0), abs=1e-12)
    assert sv[1] == 0.0 and sv[2] == 0.0
    y50 = np.concatenate([np.ones(50), np.zeros(50)])
    assert start_values(ArraySource(x, y50, 40), "binomial")[0] == 0.0
    yg = np.linspace(0, 10, 100)
    assert start_values(ArraySource(x, yg, 40), "gaussian")[0] == pytest.approx(5.0)


def test_family_and_config_validation():
    assert GlmConfig(family="binomial").family == "binomial-logit"
    assert GlmConfig(family="logistic").family == "binomial-logit"
    assert GlmConfig().family == "gaussian-identity"
    with pytest.raises(ValueError):
        GlmConfig(family="poisson")
    with pytest.raises(ValueError):
        GlmConfig(max_iter=0)
    with pytest.raises(ValueError):
        GlmConfig(tol=0.0)


def test_empty_source_raises():
    src = ArraySource(np.empty((0, 2)), np.empty(0), 10)
    with pytest.raises(EmptyInput):
        fit_glm_chunked(src, GlmConfig(family="binomial"))
    with pytest.raises(EmptyInput):
        start_values(src, "gaussian")
