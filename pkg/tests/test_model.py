"""Core data types: permutations, quadratic forms, problem validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlp.errors import DomainError
from onlp.model import (
    NlpProblem,
    Permutation,
    QuadraticForm,
    apply_col_perm,
    apply_row_perm,
    as_matrix,
    as_vector,
    permutation_from_sequence,
)


def random_permutation(rng, n):
    return Permutation(rng.permutation(n))


class TestPermutation:
    def test_single_element_is_identity(self):
        p = permutation_from_sequence([1])
        assert p.is_identity

    def test_two_element_swap_matrix(self):
        p = permutation_from_sequence([2, 1])
        np.testing.assert_array_equal(p.matrix(), [[0, 1], [1, 0]])

    def test_apply_reorders_by_image(self):
        # (Mv)_i = v_image[i]
        p = permutation_from_sequence([3, 1, 2])
        np.testing.assert_array_equal(p.apply([10.0, 20.0, 30.0]), [30.0, 10.0, 20.0])

    def test_duplicate_index_rejected(self):
        with pytest.raises(DomainError):
            permutation_from_sequence([1, 1])

    def test_out_of_range_index_rejected(self):
        with pytest.raises(DomainError):
            permutation_from_sequence([1, 3])

    def test_matrix_is_doubly_stochastic_binary(self):
        rng = np.random.default_rng(3)
        m = random_permutation(rng, 7).matrix()
        np.testing.assert_array_equal(m.sum(axis=0), np.ones(7))
        np.testing.assert_array_equal(m.sum(axis=1), np.ones(7))

    @given(st.integers(1, 30), st.integers(0, 2**32 - 1))
    def test_inverse_round_trip(self, n, seed):
        rng = np.random.default_rng(seed)
        p = random_permutation(rng, n)
        v = rng.normal(size=n)
        np.testing.assert_array_equal(p.inverse().apply(p.apply(v)), v)

    def test_matrix_agrees_with_apply(self):
        rng = np.random.default_rng(11)
        p = random_permutation(rng, 6)
        v = rng.normal(size=6)
        np.testing.assert_allclose(p.matrix() @ v, p.apply(v))


class TestRowColPermutation:
    def test_identity_leaves_matrix_alone(self):
        m = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(apply_row_perm(Permutation.identity(2), m), m)
        np.testing.assert_array_equal(apply_col_perm(m, Permutation.identity(3)), m)

    def test_row_swap(self):
        p = permutation_from_sequence([2, 1])
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(apply_row_perm(p, m), [[3.0, 4.0], [1.0, 2.0]])

    def test_col_swap(self):
        p = permutation_from_sequence([2, 1])
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(apply_col_perm(m, p), [[2.0, 1.0], [4.0, 3.0]])

    def test_dimension_mismatch_rejected(self):
        m = np.zeros((2, 3))
        with pytest.raises(DomainError):
            apply_row_perm(permutation_from_sequence([3, 1, 2]), m)
        with pytest.raises(DomainError):
            apply_col_perm(m, permutation_from_sequence([2, 1]))

    def test_entry_multiset_preserved(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(4, 4))
        p = random_permutation(rng, 4)
        assert sorted(apply_row_perm(p, m).ravel()) == sorted(m.ravel())


class TestQuadraticForm:
    def test_hand_value_and_gradient(self):
        # f(x) = x1^2 + x2^2 at (0.5, 0.5)
        q = QuadraticForm(np.diag([2.0, 2.0]), np.zeros(2))
        x = np.array([0.5, 0.5])
        assert q.value(x) == pytest.approx(0.5)
        np.testing.assert_allclose(q.gradient(x), [1.0, 1.0])

    def test_zero_point_returns_constant_and_linear(self):
        q = QuadraticForm(np.diag([4.0, 6.0]), np.array([1.0, -2.0]), const=3.5)
        assert q.value(np.zeros(2)) == 3.5
        np.testing.assert_array_equal(q.gradient(np.zeros(2)), [1.0, -2.0])

    def test_rank_one_hand_case(self):
        q = QuadraticForm(np.array([[2.0, 0.0], [0.0, 0.0]]), np.array([-2.0, 0.0]))
        x = np.array([2.0, 7.0])
        assert q.value(x) == pytest.approx(0.0)
        np.testing.assert_allclose(q.gradient(x), [2.0, 0.0])

    def test_asymmetric_input_symmetrized(self):
        q = QuadraticForm(np.array([[2.0, 4.0], [0.0, 2.0]]), np.zeros(2))
        np.testing.assert_allclose(q.dense_quad(), [[2.0, 2.0], [2.0, 2.0]])

    def test_diagonal_storage_matches_dense(self):
        d = QuadraticForm(np.array([2.0, 4.0]), np.array([1.0, 1.0]))
        full = QuadraticForm(np.diag([2.0, 4.0]), np.array([1.0, 1.0]))
        x = np.array([0.3, -1.2])
        assert d.value(x) == pytest.approx(full.value(x))
        np.testing.assert_allclose(d.gradient(x), full.gradient(x))

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def test_gradient_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        n = rng.integers(1, 6)
        quad = rng.normal(size=(n, n))
        q = QuadraticForm(quad + quad.T, rng.normal(size=n), const=rng.normal())
        x = rng.normal(size=n)
        h = 1e-5
        fd = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd[i] = (q.value(x + e) - q.value(x - e)) / (2 * h)
        np.testing.assert_allclose(q.gradient(x), fd, rtol=1e-6, atol=1e-6)

    def test_dimension_mismatch_rejected(self):
        q = QuadraticForm(np.diag([2.0, 2.0]), np.zeros(2))
        with pytest.raises(DomainError):
            q.value(np.zeros(3))

    def test_shifted_matches_substitution(self):
        rng = np.random.default_rng(2)
        quad = rng.normal(size=(3, 3))
        q = QuadraticForm(quad + quad.T, rng.normal(size=3), const=0.7)
        r = rng.normal(size=3)
        w = rng.normal(size=3)
        # shifted form evaluates the original at w - r... the shift contract:
        # shifted(r)(w) == original(w - r) would put x = w - r; here w = x + r.
        assert q.shifted(r).value(w) == pytest.approx(q.value(w - r))

    def test_scaled_multiplies_everything(self):
        q = QuadraticForm(np.diag([2.0, 0.0]), np.array([-2.0, 0.0]), const=1.0)
        s = q.scaled(3.0)
        x = np.array([0.4, 1.1])
        assert s.value(x) == pytest.approx(3.0 * q.value(x))

    def test_permuted_relabels_variables(self):
        rng = np.random.default_rng(9)
        quad = rng.normal(size=(4, 4))
        q = QuadraticForm(quad + quad.T, rng.normal(size=4))
        p = random_permutation(rng, 4)
        z = rng.normal(size=4)
        assert q.permuted(p).value(z) == pytest.approx(q.value(p.inverse().apply(z)))


class TestVectorMatrixCoercion:
    def test_as_vector_enforces_size(self):
        with pytest.raises(DomainError):
            as_vector([1.0, 2.0], 3, name="x")

    def test_as_vector_rejects_nan(self):
        with pytest.raises(DomainError):
            as_vector([np.nan], 1, name="x")

    def test_as_vector_rejects_inf_unless_allowed(self):
        with pytest.raises(DomainError):
            as_vector([np.inf], 1, name="x")
        v = as_vector([np.inf], 1, name="x", allow_inf=True)
        assert np.isposinf(v[0])

    def test_as_matrix_enforces_shape(self):
        with pytest.raises(DomainError):
            as_matrix([[1.0, 2.0]], (2, 2), name="g")


class TestNlpProblem:
    def test_valid_problem_accepted(self, toy_problem):
        assert toy_problem.n == 2
        assert toy_problem.m == 1
        assert toy_problem.l == 1

    def test_rank_deficient_equalities_rejected(self):
        with pytest.raises(DomainError):
            NlpProblem(
                objective=QuadraticForm(np.eye(2), np.zeros(2)),
                eq_matrix=[[1.0, 1.0], [2.0, 2.0]],
                eq_rhs=[1.0, 2.0],
                ineqs=(),
                ineq_rhs=[],
                lower=np.full(2, -np.inf),
                upper=np.full(2, np.inf),
            )

    def test_crossed_bounds_rejected(self):
        with pytest.raises(DomainError):
            NlpProblem(
                objective=QuadraticForm(np.eye(1), np.zeros(1)),
                eq_matrix=np.zeros((0, 1)),
                eq_rhs=[],
                ineqs=(),
                ineq_rhs=[],
                lower=[2.0],
                upper=[1.0],
            )

    def test_inequality_count_mismatch_rejected(self):
        with pytest.raises(DomainError):
            NlpProblem(
                objective=QuadraticForm(np.eye(1), np.zeros(1)),
                eq_matrix=np.zeros((0, 1)),
                eq_rhs=[],
                ineqs=(QuadraticForm(np.eye(1), np.zeros(1)),),
                ineq_rhs=[],
                lower=[-1.0],
                upper=[1.0],
            )

    def test_replace_swaps_fields(self, toy_problem):
        changed = toy_problem.replace(eq_rhs=np.array([2.0]))
        assert changed.eq_rhs[0] == 2.0
        assert toy_problem.eq_rhs[0] == 1.0
