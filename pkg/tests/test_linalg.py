"""Tests for the dense symmetric linear-algebra substrate."""

import math

import numpy as np
import pytest

from specfun_sp.errors import (
    DimensionMismatch,
    InvalidExponent,
    NonFiniteEntry,
    NonFiniteValue,
    NotPositiveDefinite,
)
from specfun_sp.linalg import (
    SymMatrix,
    generalized_eig,
    hs_norm,
    matrix_function,
    schatten_norm,
    solve_spd,
    spectral_decompose,
)


def random_sym(rng, n, scale=1.0):
    g = rng.standard_normal((n, n))
    return SymMatrix(scale * (g + g.T) / 2.0)


def random_spd(rng, n, shift=0.1):
    g = rng.standard_normal((n, n))
    return SymMatrix(g @ g.T / n + shift * np.eye(n))


class TestSymMatrix:
    def test_symmetrizes_input(self):
        m = SymMatrix([[1.0, 2.0], [0.0, 3.0]])
        assert m.a[0, 1] == m.a[1, 0] == 1.0

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            SymMatrix(np.zeros((2, 3)))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            SymMatrix(np.zeros((0, 0)))

    def test_sub_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            SymMatrix(np.eye(2)) - SymMatrix(np.eye(3))


class TestSpectralDecompose:
    def test_already_diagonal(self):
        dec = spectral_decompose(SymMatrix(np.diag([2.0, 3.0])))
        np.testing.assert_allclose(dec.eigenvalues, [2.0, 3.0])
        np.testing.assert_allclose(dec.eigenvectors, np.eye(2))

    def test_two_by_two_offdiagonal(self):
        # analytic 2x2: eigenvalues -1, 1 with (1, -1)/sqrt(2), (1, 1)/sqrt(2)
        dec = spectral_decompose(SymMatrix([[0.0, 1.0], [1.0, 0.0]]))
        s = 1.0 / math.sqrt(2.0)
        np.testing.assert_allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(dec.eigenvectors[:, 0], [s, -s], atol=1e-14)
        np.testing.assert_allclose(dec.eigenvectors[:, 1], [s, s], atol=1e-14)

    def test_zero_matrix(self):
        dec = spectral_decompose(SymMatrix(np.zeros((4, 4))))
        np.testing.assert_allclose(dec.eigenvalues, np.zeros(4))

    def test_nonfinite_rejected(self):
        a = np.eye(3)
        a[1, 1] = np.nan
        with pytest.raises(NonFiniteEntry):
            spectral_decompose(SymMatrix(a))

    @pytest.mark.parametrize("n", [1, 2, 7, 40])
    def test_reconstruction_and_orthonormality(self, n):
        rng = np.random.default_rng(n)
        A = random_sym(rng, n, scale=3.0)
        dec = spectral_decompose(A)
        q = dec.eigenvectors
        assert np.max(np.abs(q.T @ q - np.eye(n))) <= 1e-10
        recon = (q * dec.eigenvalues) @ q.T
        scale = 1.0 + np.max(np.abs(A.a))
        assert np.max(np.abs(recon - A.a)) <= 1e-9 * scale
        assert np.all(np.diff(dec.eigenvalues) >= 0.0)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        A = random_sym(rng, 12)
        d1 = spectral_decompose(A)
        d2 = spectral_decompose(SymMatrix(A.a.copy()))
        np.testing.assert_array_equal(d1.eigenvalues, d2.eigenvalues)
        np.testing.assert_array_equal(d1.eigenvectors, d2.eigenvectors)


class TestMatrixFunction:
    def test_identity_function(self):
        rng = np.random.default_rng(1)
        A = random_sym(rng, 6)
        out = matrix_function(spectral_decompose(A), lambda x: x)
        np.testing.assert_allclose(out.a, A.a, atol=1e-9)

    def test_constant_function(self):
        rng = np.random.default_rng(2)
        A = random_sym(rng, 5)
        out = matrix_function(spectral_decompose(A), lambda x: 4.25)
        np.testing.assert_allclose(out.a, 4.25 * np.eye(5), atol=1e-12)

    def test_exponential_two_by_two(self):
        # exp([[0,1],[1,0]]) = [[cosh 1, sinh 1], [sinh 1, cosh 1]]
        A = SymMatrix([[0.0, 1.0], [1.0, 0.0]])
        out = matrix_function(spectral_decompose(A), math.exp)
        expected = np.array(
            [[math.cosh(1.0), math.sinh(1.0)], [math.sinh(1.0), math.cosh(1.0)]]
        )
        np.testing.assert_allclose(out.a, expected, atol=1e-12)

    def test_nonfinite_value_rejected(self):
        A = SymMatrix(np.diag([0.0, 1000.0]))
        with pytest.raises(NonFiniteValue):
            matrix_function(spectral_decompose(A), lambda x: math.exp(x * 10))

    def test_composition_law(self):
        # f(g(A)) computed directly equals applying f to the decomposition of g(A)
        rng = np.random.default_rng(3)
        A = random_sym(rng, 8)
        dec = spectral_decompose(A)
        g = math.exp  # monotone
        f = math.log
        direct = matrix_function(dec, lambda x: f(g(x)))
        staged = matrix_function(spectral_decompose(matrix_function(dec, g)), f)
        assert np.max(np.abs(direct.a - staged.a)) <= 1e-8


class TestNorms:
    def test_hs_zero(self):
        assert hs_norm(SymMatrix(np.zeros((3, 3)))) == 0.0

    def test_hs_identity(self):
        assert hs_norm(SymMatrix(np.eye(3))) == pytest.approx(math.sqrt(3.0))

    def test_hs_example(self):
        assert hs_norm(SymMatrix([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(
            math.sqrt(10.0)
        )

    def test_hs_nonfinite(self):
        a = np.zeros((2, 2))
        a[0, 0] = np.inf
        with pytest.raises(NonFiniteEntry):
            hs_norm(SymMatrix(a))

    def test_schatten_one_identity(self):
        dec = spectral_decompose(SymMatrix(np.eye(4)))
        assert schatten_norm(dec, 1.0) == pytest.approx(4.0)

    def test_schatten_inf(self):
        dec = spectral_decompose(SymMatrix(np.diag([3.0, -4.0])))
        assert schatten_norm(dec, math.inf) == pytest.approx(4.0)

    def test_schatten_four(self):
        dec = spectral_decompose(SymMatrix(np.diag([1.0, 2.0, 2.0])))
        assert schatten_norm(dec, 4.0) == pytest.approx(33.0**0.25)

    def test_schatten_two_matches_hs(self):
        rng = np.random.default_rng(7)
        A = random_sym(rng, 9)
        dec = spectral_decompose(A)
        assert abs(schatten_norm(dec, 2.0) - hs_norm(A)) <= 1e-10

    def test_schatten_invalid_exponent(self):
        dec = spectral_decompose(SymMatrix(np.eye(2)))
        with pytest.raises(InvalidExponent):
            schatten_norm(dec, 0.5)

    def test_schatten_monotone_in_p_for_contractions(self):
        rng = np.random.default_rng(8)
        A = random_sym(rng, 6)
        dec = spectral_decompose(A)
        scale = np.abs(dec.eigenvalues).max() * 1.01
        dec_small = spectral_decompose(SymMatrix(A.a / scale))
        ps = [1.0, 1.5, 2.0, 4.0, 10.0, math.inf]
        vals = [schatten_norm(dec_small, p) for p in ps]
        assert all(vals[i] >= vals[i + 1] - 1e-12 for i in range(len(vals) - 1))
        # any Schatten norm dominates the operator norm
        op = schatten_norm(dec, math.inf)
        for p in ps:
            assert schatten_norm(dec, p) >= op - 1e-12


class TestSolveSpd:
    def test_identity(self):
        b = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(solve_spd(SymMatrix(np.eye(3)), b), b)

    def test_diagonal(self):
        x = solve_spd(SymMatrix(np.diag([2.0, 4.0])), np.array([2.0, 8.0]))
        np.testing.assert_allclose(x, [1.0, 2.0])

    def test_random_residual(self):
        rng = np.random.default_rng(11)
        A = random_spd(rng, 5)
        b = rng.standard_normal(5)
        x = solve_spd(A, b)
        res = np.linalg.norm(A.a @ x - b)
        assert res <= 1e-10 * (1.0 + np.linalg.norm(b))

    def test_matrix_rhs(self):
        rng = np.random.default_rng(12)
        A = random_spd(rng, 4)
        B = rng.standard_normal((4, 3))
        X = solve_spd(A, B)
        assert np.max(np.abs(A.a @ X - B)) <= 1e-10

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            solve_spd(SymMatrix(np.diag([1.0, -1.0])), np.ones(2))


class TestGeneralizedEig:
    def test_identity_mass_reduces_to_standard(self):
        rng = np.random.default_rng(21)
        K = random_sym(rng, 6)
        ref = spectral_decompose(K)
        gen = generalized_eig(K, SymMatrix(np.eye(6)))
        np.testing.assert_allclose(gen.eigenvalues, ref.eigenvalues, atol=1e-12)

    def test_proportional(self):
        rng = np.random.default_rng(22)
        M = random_spd(rng, 5)
        gen = generalized_eig(SymMatrix(2.0 * M.a), M)
        np.testing.assert_allclose(gen.eigenvalues, 2.0 * np.ones(5), atol=1e-10)

    def test_decoupled_diagonal(self):
        gen = generalized_eig(
            SymMatrix(np.diag([1.0, 3.0])), SymMatrix(np.diag([1.0, 2.0]))
        )
        np.testing.assert_allclose(gen.eigenvalues, [1.0, 1.5], atol=1e-14)

    @pytest.mark.parametrize("n", [2, 5, 30])
    def test_residual_and_m_orthonormality(self, n):
        rng = np.random.default_rng(100 + n)
        K = random_sym(rng, n, scale=2.0)
        M = random_spd(rng, n)
        dec = generalized_eig(K, M)
        psi = dec.eigenvectors
        assert np.max(np.abs(psi.T @ M.a @ psi - np.eye(n))) <= 1e-9
        resid = K.a @ psi - M.a @ (psi * dec.eigenvalues)
        scale = np.max(np.abs(K.a @ psi)) + 1.0
        assert np.max(np.abs(resid)) <= 1e-8 * scale

    def test_mass_not_spd(self):
        with pytest.raises(NotPositiveDefinite):
            generalized_eig(SymMatrix(np.eye(2)), SymMatrix(np.diag([1.0, 0.0])))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            generalized_eig(SymMatrix(np.eye(2)), SymMatrix(np.eye(3)))
