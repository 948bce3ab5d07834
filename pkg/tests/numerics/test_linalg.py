import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acee.numerics import svd_truncated
from acee.utils.error_handling import DimensionMismatch, DomainError, NumericFailure


def test_diagonal_rank_one():
    res = svd_truncated(np.diag([2.0, 1.0]), 1)
    np.testing.assert_allclose(res.s, [2.0])
    np.testing.assert_allclose(res.reconstruct(), [[2.0, 0.0], [0.0, 0.0]], atol=1e-12)


def test_full_rank_reconstructs(rng):
    m = rng.standard_normal((7, 4))
    res = svd_truncated(m, 4)
    np.testing.assert_allclose(res.reconstruct(), m, atol=1e-8)


def test_outer_product_rank_one(rng):
    a, b = rng.standard_normal(6), rng.standard_normal(3)
    m = np.outer(a, b)
    res = svd_truncated(m, 1)
    np.testing.assert_allclose(res.reconstruct(), m, atol=1e-8)


def test_orthonormal_and_sorted(rng):
    res = svd_truncated(rng.standard_normal((20, 8)), 5)
    np.testing.assert_allclose(res.u.T @ res.u, np.eye(5), atol=1e-8)
    np.testing.assert_allclose(res.v.T @ res.v, np.eye(5), atol=1e-8)
    assert np.all(np.diff(res.s) <= 0)
    assert np.all(res.s >= 0)


def test_sign_convention(rng):
    m = rng.standard_normal((10, 6))
    first = svd_truncated(m, 3)
    flipped = svd_truncated(-m, 3)
    for col in range(3):
        pivot = np.argmax(np.abs(first.v[:, col]))
        assert first.v[pivot, col] > 0
    np.testing.assert_allclose(flipped.v, first.v, atol=1e-10)
    np.testing.assert_allclose(flipped.u, -first.u, atol=1e-10)


@pytest.mark.parametrize("q", [0, 5])
def test_rank_out_of_range(q):
    with pytest.raises(DomainError):
        svd_truncated(np.ones((4, 4)), q)


def test_non_finite_rejected():
    m = np.eye(3)
    m[0, 1] = np.nan
    with pytest.raises(NumericFailure):
        svd_truncated(m, 1)


def test_vector_rejected():
    with pytest.raises(DimensionMismatch):
        svd_truncated(np.ones(3), 1)


@settings(max_examples=1000)
@given(
    rows=st.integers(2, 12),
    cols=st.integers(2, 12),
    seed=st.integers(0, 2**32 - 1),
    data=st.data(),
)
def test_eckart_young_beats_random_candidates(rows, cols, seed, data):
    q = data.draw(st.integers(1, min(rows, cols)))
    gen = np.random.default_rng(seed)
    m = gen.standard_normal((rows, cols))
    best = np.linalg.norm(m - svd_truncated(m, q).reconstruct())
    for _ in range(100):
        candidate = gen.standard_normal((rows, q)) @ gen.standard_normal((q, cols))
        assert best <= np.linalg.norm(m - candidate) + 1e-10
