import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mompca.errors import ConvergenceFailure, DimensionMismatch, InvalidData, InvalidInputs, RankDeficient
from mompca.linalg import (
    apply_projector,
    as_data_matrix,
    gram_schmidt_orthonormalize,
    orthonormality_error,
    residual_value,
    scatter_matrix,
    top_eigenvectors,
)
from mompca.metrics import principal_angles
from oracles import jacobi_eigh


def random_basis(rng, p, d):
    return np.linalg.qr(rng.standard_normal((p, d)))[0]


class TestGramSchmidt:
    def test_identity_columns_unchanged(self):
        M = np.eye(3)[:, :2]
        np.testing.assert_array_equal(gram_schmidt_orthonormalize(M), M)

    def test_rescaling_only(self):
        M = np.array([[2.0, 0], [0, 0], [0, 3]])
        np.testing.assert_array_equal(gram_schmidt_orthonormalize(M), [[1, 0], [0, 0], [0, 1]])

    def test_random_span_preserved(self):
        M = np.random.default_rng(42).standard_normal((5, 3))
        Q = gram_schmidt_orthonormalize(M)
        assert orthonormality_error(Q) <= 1e-10
        coef, *_ = np.linalg.lstsq(Q, M, rcond=None)
        assert np.linalg.norm(Q @ coef - M) < 1e-8

    def test_triangular_structure(self):
        # column j of Q lies in span of the first j+1 columns of M
        M = np.random.default_rng(1).standard_normal((6, 4))
        Q = gram_schmidt_orthonormalize(M)
        R = Q.T @ M
        assert np.max(np.abs(np.tril(R, -1))) < 1e-12

    def test_rank_deficient(self):
        M = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
        with pytest.raises(RankDeficient) as info:
            gram_schmidt_orthonormalize(M)
        assert info.value.column == 1

    def test_zero_column(self):
        with pytest.raises(RankDeficient):
            gram_schmidt_orthonormalize(np.zeros((3, 1)))

    @pytest.mark.parametrize("shape", [(2, 3), (3, 0)])
    def test_bad_shape(self, shape):
        with pytest.raises(DimensionMismatch):
            gram_schmidt_orthonormalize(np.ones(shape))

    def test_ill_conditioned(self):
        # nearly parallel columns still come out orthonormal thanks to the second sweep
        rng = np.random.default_rng(5)
        a = rng.standard_normal(50)
        M = np.column_stack([a, a + 1e-9 * rng.standard_normal(50), rng.standard_normal(50)])
        assert orthonormality_error(gram_schmidt_orthonormalize(M)) <= 1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31))
    def test_property_orthonormal(self, p, d, seed):
        d = min(p, d)
        M = np.random.default_rng(seed).standard_normal((p, d))
        Q = gram_schmidt_orthonormalize(M)
        assert orthonormality_error(Q) <= 1e-10


class TestScatter:
    def test_single_row(self):
        np.testing.assert_array_equal(scatter_matrix([[1.0, 2.0]]), [[1, 2], [2, 4]])

    def test_identity(self):
        np.testing.assert_array_equal(scatter_matrix([[1.0, 0], [0, 1]]), np.eye(2))

    def test_against_double_loop(self):
        X = np.random.default_rng(7).standard_normal((100, 4))
        oracle = np.zeros((4, 4))
        for x in X:
            for a in range(4):
                for b in range(4):
                    oracle[a, b] += x[a] * x[b]
        S = scatter_matrix(X)
        np.testing.assert_allclose(S, oracle, atol=1e-12, rtol=0)
        assert np.array_equal(S, S.T)

    def test_deterministic(self):
        X = np.random.default_rng(3).standard_normal((500, 20))
        assert np.array_equal(scatter_matrix(X), scatter_matrix(X.copy()))

    def test_rejects_nan(self):
        with pytest.raises(InvalidData):
            scatter_matrix([[1.0, np.nan]])


class TestTopEigenvectors:
    def test_diagonal(self):
        V, lam = top_eigenvectors(np.diag([3.0, 2.0, 1.0]), 2)
        np.testing.assert_allclose(lam, [3, 2], atol=1e-12)
        np.testing.assert_allclose(V, np.eye(3)[:, :2], atol=1e-10)

    def test_swap_matrix(self):
        V, lam = top_eigenvectors(np.array([[0.0, 1.0], [1.0, 0.0]]), 1)
        np.testing.assert_allclose(lam, [1.0], atol=1e-12)
        np.testing.assert_allclose(V[:, 0], [2**-0.5, 2**-0.5], atol=1e-10)

    def test_against_jacobi(self):
        A = np.random.default_rng(11).standard_normal((8, 8))
        S = A + A.T
        V, lam = top_eigenvectors(S, 3)
        w, U = jacobi_eigh(S)
        np.testing.assert_allclose(lam, w[:3], atol=1e-8)
        assert np.max(principal_angles(V, U[:, :3])) < 1e-6

    def test_residual_and_sign_convention(self):
        A = np.random.default_rng(2).standard_normal((30, 12))
        S = A.T @ A
        V, lam = top_eigenvectors(S, 4, assume_psd=True)
        fro = np.linalg.norm(S)
        for j in range(4):
            assert np.linalg.norm(S @ V[:, j] - lam[j] * V[:, j]) <= 1e-8 * fro
            assert V[np.argmax(np.abs(V[:, j])), j] > 0
        assert np.all(np.diff(lam) <= 0)
        assert orthonormality_error(V) <= 1e-10

    def test_diagonal_descending_exact(self):
        lam_true = np.array([9.0, 7.0, 4.0, 2.0, 1.0, 0.5])
        V, lam = top_eigenvectors(np.diag(lam_true), 6)
        np.testing.assert_allclose(np.abs(V), np.eye(6), atol=1e-12)
        np.testing.assert_allclose(lam, lam_true, atol=1e-12)

    def test_indefinite(self):
        S = np.diag([-5.0, 3.0, -1.0])
        V, lam = top_eigenvectors(S, 2)
        np.testing.assert_allclose(lam, [3.0, -1.0], atol=1e-10)

    def test_zero_matrix(self):
        V, lam = top_eigenvectors(np.zeros((4, 4)), 2)
        assert orthonormality_error(V) == 0
        np.testing.assert_array_equal(lam, 0)

    def test_convergence_failure(self):
        S = np.diag(np.linspace(1.0, 0.999, 40))
        S[0, 1] = S[1, 0] = 1e-6
        with pytest.raises(ConvergenceFailure):
            top_eigenvectors(S, 1, max_iter=1, tol=1e-15)

    @pytest.mark.parametrize("d", [0, 4])
    def test_bad_d(self, d):
        with pytest.raises(InvalidInputs):
            top_eigenvectors(np.eye(3), d)

    def test_not_symmetric(self):
        with pytest.raises(InvalidInputs):
            top_eigenvectors(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)


class TestProjector:
    def test_e1(self):
        V = np.array([[1.0], [0.0]])
        np.testing.assert_array_equal(apply_projector(V, [3.0, 4.0]), [3, 0])
        assert residual_value(V, [3.0, 4.0]) == 16.0

    def test_full_rank_identity(self):
        V = random_basis(np.random.default_rng(0), 4, 4)
        x = np.arange(4.0)
        np.testing.assert_allclose(apply_projector(V, x), x, atol=1e-12)

    def test_against_dense(self):
        rng = np.random.default_rng(3)
        V = gram_schmidt_orthonormalize(rng.standard_normal((5, 2)))
        x = rng.standard_normal(5)
        np.testing.assert_allclose(apply_projector(V, x), V @ V.T @ x, atol=1e-12)
        px = apply_projector(V, x)
        np.testing.assert_allclose(apply_projector(V, px), px, atol=1e-10)

    def test_residual_in_span_and_orthogonal(self):
        V = np.eye(3)[:, :2]
        assert residual_value(V, [1.0, 2.0, 0.0]) == 0.0
        assert residual_value(V, [0.0, 0.0, 5.0]) == 25.0

    def test_rowwise(self):
        rng = np.random.default_rng(4)
        V = random_basis(rng, 6, 2)
        X = rng.standard_normal((10, 6))
        r = residual_value(V, X)
        assert r.shape == (10,)
        for i in range(10):
            assert r[i] == pytest.approx(residual_value(V, X[i]), rel=1e-12)

    def test_pythagoras_1000_pairs(self):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            p = int(rng.integers(1, 9))
            d = int(rng.integers(1, p + 1))
            V = random_basis(rng, p, d)
            x = rng.standard_normal(p) * 10 ** rng.uniform(-3, 3)
            nx = float(x @ x)
            proj = float(np.sum((V.T @ x) ** 2))
            assert residual_value(V, x) + proj == pytest.approx(nx, rel=1e-8, abs=1e-10 * nx)
            diff = x - apply_projector(V, x)
            assert residual_value(V, x) == pytest.approx(float(diff @ diff), rel=1e-8, abs=1e-8 * nx)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            apply_projector(np.eye(3)[:, :1], [1.0, 2.0])
        with pytest.raises(DimensionMismatch):
            residual_value(np.eye(3)[:, :1], [1.0, 2.0])


def test_as_data_matrix():
    assert as_data_matrix([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(InvalidData):
        as_data_matrix(np.zeros((0, 3)))
    with pytest.raises(InvalidData):
        as_data_matrix([[np.inf]])
