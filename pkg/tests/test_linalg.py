"""Dense LU with partial pivoting: solve contract and failure modes."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlp.errors import DomainError, SingularMatrix
from onlp.linalg import LuFactors, factor_square, row_rank_defect, solve_linear


def residual(a, x, b):
    return np.abs(a @ x - b).max()


class TestSolveLinear:
    def test_identity_returns_rhs(self):
        b = np.array([3.0, -1.0, 2.5])
        np.testing.assert_array_equal(solve_linear(np.eye(3), b), b)

    def test_diagonal_hand_case(self):
        a = np.array([[2.0, 0.0], [0.0, 4.0]])
        np.testing.assert_allclose(solve_linear(a, [2.0, 8.0]), [1.0, 2.0])

    def test_singular_matrix_raises(self):
        with pytest.raises(SingularMatrix):
            solve_linear(np.ones((2, 2)), [1.0, 1.0])

    def test_zero_pivot_needs_row_exchange(self):
        # without pivoting the (0,0) zero would divide
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(solve_linear(a, [5.0, 7.0]), [7.0, 5.0])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 40))
    def test_residual_bound_random_systems(self, seed, n):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        x = solve_linear(a, b)
        assert residual(a, x, b) <= 1e-9 * (1 + np.abs(b).max())

    def test_residual_bound_large_system(self):
        rng = np.random.default_rng(0)
        n = 500
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        assert residual(a, solve_linear(a, b), b) <= 1e-9 * (1 + np.abs(b).max())

    def test_empty_system(self):
        x = solve_linear(np.zeros((0, 0)), np.zeros(0))
        assert x.shape == (0,)


class TestFactorReuse:
    def test_factors_solve_multiple_rhs(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(6, 6)) + 6 * np.eye(6)
        f = factor_square(a)
        for _ in range(3):
            b = rng.normal(size=6)
            np.testing.assert_allclose(a @ f.solve(b), b, atol=1e-10)

    def test_transpose_solve(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(5, 5)) + 5 * np.eye(5)
        b = rng.normal(size=5)
        x = factor_square(a).solve(b, trans=1)
        np.testing.assert_allclose(a.T @ x, b, atol=1e-10)

    def test_near_singular_pivot_rejected(self):
        a = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]])
        with pytest.raises(SingularMatrix):
            factor_square(a)

    def test_non_square_rejected(self):
        with pytest.raises(DomainError):
            factor_square(np.zeros((2, 3)))


class TestRowRankDefect:
    def test_full_rank_zero_defect(self):
        assert row_rank_defect(np.array([[1.0, 0.0], [0.0, 1.0]])) == 0

    def test_duplicate_row_defect_one(self):
        assert row_rank_defect(np.array([[1.0, 1.0], [2.0, 2.0]])) == 1

    def test_wide_full_rank(self):
        assert row_rank_defect(np.array([[1.0, 0.0, 3.0]])) == 0

    def test_empty_matrix(self):
        assert row_rank_defect(np.zeros((0, 4))) == 0
