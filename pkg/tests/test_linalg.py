import numpy as np
import pytest

from streamreg.errors import DimensionMismatch, NotPositiveDefinite
from streamreg.linalg import (
    QrState,
    incremental_qr_update,
    pseudo_inverse,
    qr_gram,
    qr_solve,
    solve_spd,
)


def test_solve_spd_frozen():
    a = np.array([[4.0, 2.0], [2.0, 3.0]])
    b = np.array([2.0, 5.0])
    x = solve_spd(a, b)
    assert np.allclose(x, [-0.5, 2.0], rtol=0, atol=1e-14)


def test_solve_spd_random_against_numpy():
    rng = np.random.default_rng(42)
    for _ in range(200):
        d = int(rng.integers(1, 9))
        m = rng.standard_normal((d + 3, d))
        a = m.T @ m
        b = rng.standard_normal(d)
        assert np.allclose(solve_spd(a, b), np.linalg.solve(a, b), rtol=1e-9, atol=1e-12)


def test_solve_spd_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        solve_spd(np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        solve_spd(np.eye(2), np.zeros(3))
    with pytest.raises(NotPositiveDefinite):
        solve_spd(np.array([[1.0, 1.0], [1.0, 1.0]]), np.ones(2))
    with pytest.raises(NotPositiveDefinite):
        solve_spd(np.array([[-1.0]]), np.ones(1))


def test_pseudo_inverse_frozen():
    assert np.allclose(pseudo_inverse(np.array([[8.0]])), [[0.125]], rtol=0, atol=0)


def test_pseudo_inverse_penrose_conditions():
    rng = np.random.default_rng(7)
    for trial in range(300):
        d = int(rng.integers(1, 9))
        rank = int(rng.integers(0, d + 1))
        q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        w = np.zeros(d)
        w[:rank] = rng.uniform(0.5, 4.0, size=rank)
        a = (q * w) @ q.T
        a = 0.5 * (a + a.T)
        g = pseudo_inverse(a)
        assert np.allclose(a @ g @ a, a, atol=1e-9), trial
        assert np.allclose(g @ a @ g, g, atol=1e-9), trial
        assert np.allclose((a @ g).T, a @ g, atol=1e-9), trial
        assert np.allclose((g @ a).T, g @ a, atol=1e-9), trial


def test_pseudo_inverse_equals_inverse_when_full_rank():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((6, 4))
    a = m.T @ m
    assert np.allclose(pseudo_inverse(a), np.linalg.inv(a), rtol=1e-9, atol=1e-12)


def _absorb_rows(state, x, w, y):
    for i in range(x.shape[0]):
        incremental_qr_update(state, x[i], w[i], y[i])
    return state


def test_qr_matches_weighted_least_squares():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, d = 40, 4
        x = np.hstack([np.ones((n, 1)), rng.standard_normal((n, d - 1))])
        y = rng.standard_normal(n)
        w = rng.uniform(0.2, 3.0, size=n)
        state = _absorb_rows(QrState(d), x, w, y)
        sw = np.sqrt(w)
        beta_ref, *_ = np.linalg.lstsq(x * sw[:, None], y * sw, rcond=None)
        assert np.allclose(qr_solve(state), beta_ref, rtol=1e-8, atol=1e-10)
        assert np.allclose(qr_gram(state), (x * w[:, None]).T @ x, rtol=1e-8, atol=1e-8)
        resid = y - x @ beta_ref
        assert np.isclose(state.rss, float(w @ resid**2), rtol=1e-8)


def test_qr_zero_weight_rows_are_counted_but_inert():
    state = QrState(2)
    incremental_qr_update(state, np.array([1.0, 2.0]), 1.0, 3.0)
    incremental_qr_update(state, np.array([9.0, 9.0]), 0.0, 99.0)
    incremental_qr_update(state, np.array([1.0, -1.0]), 1.0, 0.0)
    assert state.n == 3
    beta_ref, *_ = np.linalg.lstsq(
        np.array([[1.0, 2.0], [1.0, -1.0]]), np.array([3.0, 0.0]), rcond=None
    )
    assert np.allclose(qr_solve(state), beta_ref, rtol=1e-10, atol=1e-12)


def test_qr_negative_weight_raises():
    state = QrState(2)
    with pytest.raises(ValueError):
        incremental_qr_update(state, np.array([1.0, 0.0]), -0.5, 1.0)


def test_qr_underdetermined_uses_zero_convention():
    # only one distinct direction seen: missing component comes back as 0
    state = QrState(2)
    incremental_qr_update(state, np.array([1.0, 0.0]), 1.0, 2.0)
    beta = qr_solve(state)
    assert beta[0] == pytest.approx(2.0, abs=1e-12)
    assert beta[1] == 0.0
