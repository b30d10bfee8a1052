import numpy as np
import pytest

from src.utils.errors import NotSPD, ZeroVector
from src.utils.numerics import (
    as_vector,
    cholesky_factor,
    nullspace_basis,
    quad_norm,
    quad_norms,
    rank1_update,
    spd_solve,
)


def random_spd(d, seed):
    gen = np.random.default_rng(seed)
    M = gen.normal(size=(d, d))
    return M @ M.T + d * np.eye(d)


class TestCholesky:
    def test_rejects_asymmetric(self):
        with pytest.raises(NotSPD):
            cholesky_factor(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotSPD):
            cholesky_factor(np.diag([1.0, -1.0]))

    def test_rejects_non_square(self):
        with pytest.raises(NotSPD):
            cholesky_factor(np.ones((2, 3)))

    def test_solve_matches_dense_solver(self):
        A = random_spd(6, 0)
        b = np.arange(6.0)
        np.testing.assert_allclose(spd_solve(A, b), np.linalg.solve(A, b), rtol=1e-10)

    def test_solve_with_cached_factor(self):
        A = random_spd(4, 1)
        factor = cholesky_factor(A)
        B = np.eye(4)
        np.testing.assert_allclose(spd_solve(None, B, factor=factor), np.linalg.inv(A), atol=1e-12)


class TestQuadNorm:
    def test_plain_norm(self):
        assert quad_norm([1.0, 2.0], np.diag([2.0, 3.0])) == pytest.approx(np.sqrt(14.0))

    def test_inverse_norm(self):
        value = quad_norm([1.0, 2.0], np.diag([2.0, 3.0]), inverse=True)
        assert value == pytest.approx(np.sqrt(0.5 + 4.0 / 3.0))

    def test_rows_match_single_norms(self):
        M = random_spd(5, 2)
        X = np.random.default_rng(3).normal(size=(7, 5))
        expected = [quad_norm(x, M, inverse=True) for x in X]
        np.testing.assert_allclose(quad_norms(X, M, inverse=True), expected, rtol=1e-12)

    def test_zero_vector_has_zero_norm(self):
        assert quad_norm(np.zeros(3), np.eye(3)) == 0.0


class TestRank1Update:
    def test_does_not_modify_input(self):
        A = np.eye(2)
        B = rank1_update(A, [1.0, 2.0])
        np.testing.assert_array_equal(A, np.eye(2))
        np.testing.assert_array_equal(B, [[2.0, 2.0], [2.0, 5.0]])

    def test_thousand_updates_match_batch_design(self):
        gen = np.random.default_rng(17)
        d, lam = 6, 1.0
        X = gen.normal(size=(1000, d)) / np.sqrt(d)
        y = gen.normal(size=1000)
        A = lam * np.eye(d)
        b = np.zeros(d)
        for x, r in zip(X, y):
            A = rank1_update(A, x)
            b = b + r * x
        batch = lam * np.eye(d) + X.T @ X
        np.testing.assert_allclose(A, batch, rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(spd_solve(A, b), np.linalg.solve(batch, X.T @ y), atol=1e-7)


class TestNullspaceBasis:
    @pytest.mark.parametrize("d", [2, 3, 5, 10])
    def test_orthonormal_and_orthogonal(self, d):
        v = np.random.default_rng(d).normal(size=d)
        B = nullspace_basis(v)
        assert B.shape == (d, d - 1)
        np.testing.assert_allclose(B.T @ B, np.eye(d - 1), atol=1e-12)
        np.testing.assert_allclose(B.T @ v, np.zeros(d - 1), atol=1e-12)

    def test_negative_leading_component(self):
        v = np.array([-3.0, 1.0, 2.0])
        B = nullspace_basis(v)
        np.testing.assert_allclose(B.T @ v, np.zeros(2), atol=1e-12)

    def test_deterministic(self):
        v = np.array([0.3, -0.2, 0.9])
        np.testing.assert_array_equal(nullspace_basis(v), nullspace_basis(v.copy()))

    def test_known_two_dimensional_basis(self):
        np.testing.assert_allclose(nullspace_basis([0.0, 1.0]), [[-1.0], [0.0]], atol=1e-15)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            nullspace_basis(np.zeros(3))


class TestAsVector:
    def test_length_check(self):
        with pytest.raises(ValueError):
            as_vector([1.0, 2.0], d=3)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            as_vector([1.0, np.nan])
