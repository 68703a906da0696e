"""Masking transform: keygen, encrypt/decrypt round trips, key serialization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlp.errors import DomainError, ParseError
from onlp.model import NlpProblem, Permutation, QuadraticForm
from onlp.transform import (
    DEAD_ZONE_FACTOR,
    KeyParams,
    SecretKey,
    decrypt,
    encrypt,
    encrypt_point,
    identity_key,
    key_from_bytes,
    key_to_bytes,
    keygen,
)


def random_problem(rng, n, m, l):
    """Small strictly feasible problem with a box around the origin."""
    quad = rng.normal(size=(n, n))
    objective = QuadraticForm(quad @ quad.T / n + np.eye(n), rng.normal(size=n))
    x0 = rng.uniform(-1.0, 1.0, size=n)
    g = rng.normal(size=(m, n))
    ineqs = []
    ineq_rhs = []
    for _ in range(l):
        c = rng.normal(size=(n, n)) / n
        q = QuadraticForm(c @ c.T, rng.normal(size=n))
        ineqs.append(q)
        ineq_rhs.append(q.value(x0) + rng.uniform(0.5, 1.0))
    return NlpProblem(
        objective=objective,
        eq_matrix=g,
        eq_rhs=g @ x0,
        ineqs=tuple(ineqs),
        ineq_rhs=ineq_rhs,
        lower=np.full(n, -5.0),
        upper=np.full(n, 5.0),
    ), x0


class TestKeygen:
    def test_single_variable_permutation_forced_identity(self):
        key = keygen(1, 1, 1, KeyParams(seed=123))
        assert key.col_perm.is_identity

    def test_deterministic_given_seed(self):
        a = keygen(8, 2, 3, KeyParams(seed=42))
        b = keygen(8, 2, 3, KeyParams(seed=42))
        assert key_to_bytes(a) == key_to_bytes(b)

    def test_different_seeds_differ(self):
        a = keygen(8, 2, 3, KeyParams(seed=1))
        b = keygen(8, 2, 3, KeyParams(seed=2))
        assert key_to_bytes(a) != key_to_bytes(b)

    def test_large_draw_matches_declared_distribution(self):
        key = keygen(1000, 300, 300, KeyParams(mask_range=10.0, seed=7))
        assert abs(key.shift.mean()) < 0.5
        assert (key.ineq_scale > 0).all()
        assert np.abs(key.shift).max() < 10.0
        assert np.abs(key.eq_scale).max() < 10.0

    def test_eq_scale_avoids_dead_zone(self):
        key = keygen(50, 50, 0, KeyParams(mask_range=10.0, seed=3))
        assert np.abs(key.eq_scale).min() > DEAD_ZONE_FACTOR * 10.0

    def test_invalid_params_rejected(self):
        with pytest.raises(DomainError):
            KeyParams(mask_range=-1.0)
        with pytest.raises(DomainError):
            KeyParams(c_eq=0.0)
        with pytest.raises(DomainError):
            keygen(-1, 0, 0, KeyParams())

    def test_key_invariants_enforced_at_construction(self):
        params = KeyParams(mask_range=10.0)
        with pytest.raises(DomainError):
            SecretKey(
                params=params,
                shift=np.zeros(1),
                eq_scale=np.array([0.0]),  # inside the dead zone
                ineq_scale=np.zeros(0),
                row_perm_eq=Permutation.identity(1),
                row_perm_ineq=Permutation.identity(0),
                col_perm=Permutation.identity(1),
            )


class TestEncryptHandOracle:
    """min x1^2+x2^2, x1+x2=1, x1^2<=1, -10<=x<=10 under a worked-out key."""

    @pytest.fixture
    def key(self):
        params = KeyParams(mask_range=10.0, c_eq=1.0, c_ineq=1.0, seed=0)
        return SecretKey(
            params=params,
            shift=np.array([1.0, -1.0]),
            eq_scale=np.array([2.0]),
            ineq_scale=np.array([3.0]),
            row_perm_eq=Permutation.identity(1),
            row_perm_ineq=Permutation.identity(1),
            col_perm=Permutation.identity(2),
        )

    def test_equality_row_scaled_and_shifted(self, toy_problem, key):
        enc = encrypt(toy_problem, key)
        np.testing.assert_allclose(enc.eq_matrix, [[2.0, 2.0]])
        np.testing.assert_allclose(enc.eq_rhs, [2.0])

    def test_inequality_substituted_and_scaled(self, toy_problem, key):
        enc = encrypt(toy_problem, key)
        np.testing.assert_allclose(enc.ineqs[0].dense_quad(), np.diag([6.0, 0.0]))
        np.testing.assert_allclose(enc.ineqs[0].lin, [-6.0, 0.0])
        np.testing.assert_allclose(enc.ineq_rhs, [0.0])

    def test_bounds_shifted(self, toy_problem, key):
        enc = encrypt(toy_problem, key)
        np.testing.assert_allclose(enc.lower, [-9.0, -11.0])
        np.testing.assert_allclose(enc.upper, [11.0, 9.0])

    def test_objective_value_preserved_pointwise(self, toy_problem, key):
        enc = encrypt(toy_problem, key)
        x = np.array([0.5, 0.5])
        z = encrypt_point(x, key)
        assert enc.objective.value(z) == pytest.approx(toy_problem.objective.value(x))


class TestIdentityKey:
    def test_encrypt_is_identity(self, toy_problem):
        key = identity_key(2, 1, 1)
        enc = encrypt(toy_problem, key)
        np.testing.assert_array_equal(enc.eq_matrix, toy_problem.eq_matrix)
        np.testing.assert_array_equal(enc.eq_rhs, toy_problem.eq_rhs)
        np.testing.assert_array_equal(enc.lower, toy_problem.lower)
        np.testing.assert_array_equal(enc.upper, toy_problem.upper)
        np.testing.assert_array_equal(enc.ineqs[0].lin, toy_problem.ineqs[0].lin)

    def test_decrypt_is_identity(self):
        key = identity_key(3, 0, 0)
        z = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(decrypt(z, key), z)


class TestRoundTrip:
    def test_hand_inverse_shift(self):
        key = identity_key(2, 0, 0)
        key = SecretKey(
            params=key.params,
            shift=np.array([1.0, -1.0]),
            eq_scale=key.eq_scale,
            ineq_scale=key.ineq_scale,
            row_perm_eq=key.row_perm_eq,
            row_perm_ineq=key.row_perm_ineq,
            col_perm=key.col_perm,
        )
        np.testing.assert_allclose(decrypt(np.array([1.5, -0.5]), key), [0.5, 0.5])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_decrypt_inverts_encrypt_point(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 12))
        key = keygen(n, 0, 0, KeyParams(seed=seed))
        x = rng.uniform(-100, 100, size=n)
        np.testing.assert_allclose(decrypt(encrypt_point(x, key), key), x, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_feasibility_and_objective_preserved(self, seed):
        rng = np.random.default_rng(seed)
        p, x0 = random_problem(rng, 4, 2, 2)
        key = keygen(4, 2, 2, KeyParams(seed=seed))
        enc = encrypt(p, key)
        z0 = encrypt_point(x0, key)
        # strictly feasible interior point stays feasible with slack to spare
        assert np.abs(enc.eq_matrix @ z0 - enc.eq_rhs).max() < 1e-8
        for q, rhs in zip(enc.ineqs, enc.ineq_rhs):
            assert q.value(z0) <= rhs + 1e-9
        assert (enc.lower <= z0).all() and (z0 <= enc.upper).all()
        assert enc.objective.value(z0) == pytest.approx(p.objective.value(x0))

    def test_dimension_mismatch_rejected(self, toy_problem):
        key = keygen(3, 1, 1, KeyParams(seed=0))
        with pytest.raises(DomainError):
            encrypt(toy_problem, key)
        with pytest.raises(DomainError):
            decrypt(np.zeros(2), key)


class TestFeasibleSetEquivalence:
    def test_grid_points_agree_small_problem(self):
        """Mapping the grid through the key preserves the feasibility verdict."""
        rng = np.random.default_rng(5)
        p, _ = random_problem(rng, 2, 1, 1)
        key = keygen(2, 1, 1, KeyParams(mask_range=3.0, seed=11))
        enc = encrypt(p, key)
        xs = np.arange(-2.0, 2.0 + 1e-12, 0.25)
        tol = 1e-9
        for x1 in xs:
            for x2 in xs:
                x = np.array([x1, x2])
                z = encrypt_point(x, key)
                f_orig = (
                    np.abs(p.eq_matrix @ x - p.eq_rhs).max() <= tol
                    and all(q.value(x) <= r + tol for q, r in zip(p.ineqs, p.ineq_rhs))
                    and (p.lower - tol <= x).all()
                    and (x <= p.upper + tol).all()
                )
                f_enc = (
                    np.abs(enc.eq_matrix @ z - enc.eq_rhs).max() <= tol * 10
                    and all(q.value(z) <= r + tol * 10 for q, r in zip(enc.ineqs, enc.ineq_rhs))
                    and (enc.lower - tol <= z).all()
                    and (z <= enc.upper + tol).all()
                )
                assert f_orig == f_enc, (x, z)


class TestKeySerialization:
    def test_round_trip(self):
        key = keygen(6, 2, 2, KeyParams(mask_range=8.0, c_eq=2.0, c_ineq=0.5, seed=99))
        again = key_from_bytes(key_to_bytes(key))
        assert key_to_bytes(again) == key_to_bytes(key)
        np.testing.assert_array_equal(again.shift, key.shift)
        np.testing.assert_array_equal(again.col_perm.image, key.col_perm.image)

    def test_deterministic_bytes(self):
        a = keygen(4, 1, 1, KeyParams(seed=5))
        b = keygen(4, 1, 1, KeyParams(seed=5))
        assert key_to_bytes(a) == key_to_bytes(b)

    def test_malformed_bytes_rejected(self):
        with pytest.raises(ParseError):
            key_from_bytes(b"not json at all {")

    def test_truncated_payload_rejected(self):
        raw = key_to_bytes(keygen(3, 1, 1, KeyParams(seed=1)))
        with pytest.raises(ParseError):
            key_from_bytes(raw[: len(raw) // 2])

    def test_wrong_version_rejected(self):
        raw = key_to_bytes(keygen(2, 1, 0, KeyParams(seed=1)))
        with pytest.raises(ParseError):
            key_from_bytes(raw.replace(b'"version":1', b'"version":99'))
