import math

import numpy as np
import pytest

from divsum import (
    InvalidInputError,
    SingularOracleError,
    UNIT_ROUNDOFF,
    dirichlet_pow,
    hadamard_closed_form,
    is_positive_definite,
    jordan_block,
    jordan_function_oracle,
    loewner_less,
    mat_exp,
    mat_pow_nat,
    mat_sin,
    neumann_closed_form,
    spectral_norm,
)

I2 = np.eye(2, dtype=complex)
I3 = np.eye(3, dtype=complex)


def two_by_two_singular_values(a):
    # Explicit closed form through the 2x2 Gram matrix eigenvalues.
    g = a.conj().T @ a
    tr = g[0, 0].real + g[1, 1].real
    det = (g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]).real
    disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
    return math.sqrt(tr / 2 + disc), math.sqrt(max(tr / 2 - disc, 0.0))


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(I3) == pytest.approx(1.0)

    def test_diagonal_sign(self):
        assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)

    def test_nilpotent_two(self):
        a = np.array([[0, 2], [0, 0]], dtype=complex)
        expected, _ = two_by_two_singular_values(a)
        assert spectral_norm(a) == pytest.approx(expected)
        assert expected == pytest.approx(2.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            spectral_norm(np.array([[np.nan, 0], [0, 1]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(InvalidInputError):
            spectral_norm(np.ones((2, 3)))

    def test_submultiplicative_on_random_samples(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            assert spectral_norm(a @ b) <= spectral_norm(a) * spectral_norm(b) * (1 + 1e-12)


class TestDefiniteness:
    def test_identity_is_pd(self):
        assert is_positive_definite(I3)

    def test_negated_identity_is_not(self):
        assert not is_positive_definite(-I3)

    def test_symmetric_two_by_two(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
        # Eigenvalues by the 2x2 formula: mean +- half-gap.
        assert {1.0, 3.0} == {round(2.0 - 1.0, 9), round(2.0 + 1.0, 9)}
        assert is_positive_definite(a)

    def test_non_hermitian_returns_false(self):
        assert not is_positive_definite(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_loewner_basic(self):
        assert loewner_less(I2, 2 * I2)
        assert not loewner_less(2 * I2, I2)

    def test_loewner_difference_psd(self):
        b = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
        # b - I has eigenvalues 0 and 2.
        assert loewner_less(I2, b)

    def test_loewner_dim_mismatch(self):
        with pytest.raises(InvalidInputError):
            loewner_less(I2, I3)


class TestMatExp:
    def test_zero(self):
        np.testing.assert_allclose(mat_exp(np.zeros((3, 3))), I3, atol=0)

    def test_diagonal(self):
        e = mat_exp(np.diag([math.log(2.0), 0.0]))
        np.testing.assert_allclose(e, np.diag([2.0, 1.0]), rtol=1e-14)

    def test_nilpotent(self):
        e = mat_exp(np.array([[0.0, 1.0], [0.0, 0.0]]))
        np.testing.assert_allclose(e, np.array([[1, 1], [0, 1]]), rtol=0, atol=1e-15)

    def test_inverse_pairing(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            a *= 5.0 / max(spectral_norm(a), 1e-9)
            prod = mat_exp(a) @ mat_exp(-a)
            assert spectral_norm(prod - np.eye(6)) < 1e-10

    def test_against_diagonalization(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            d = 5
            w = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            lam = rng.normal(size=d) + 1j * rng.normal(size=d)
            a = w @ np.diag(lam) @ np.linalg.inv(w)
            cond = np.linalg.cond(w)
            expected = w @ np.diag(np.exp(lam)) @ np.linalg.inv(w)
            assert spectral_norm(mat_exp(a) - expected) <= 1e-8 * cond * max(spectral_norm(expected), 1.0)

    def test_overflow_reported(self):
        with pytest.raises(OverflowError):
            mat_exp(np.diag([2000.0, 0.0]))


class TestMatSin:
    def test_zero(self):
        np.testing.assert_array_equal(mat_sin(np.zeros((2, 2))), np.zeros((2, 2)))

    def test_diagonal_half_pi(self):
        s = mat_sin(np.diag([math.pi / 2]))
        np.testing.assert_allclose(s, np.diag([1.0]), rtol=1e-14)

    def test_jordan_block_oracle(self):
        j = np.array([[0.0, 1.0], [0.0, 0.0]])
        expected = jordan_function_oracle([math.sin(0.0), math.cos(0.0)], 2)
        np.testing.assert_allclose(mat_sin(j), expected, atol=1e-15)

    def test_real_input_gives_real_result(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(4, 4))
        assert np.all(mat_sin(a).imag == 0.0)


class TestPowers:
    def test_zeroth_power(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 4))
        np.testing.assert_array_equal(mat_pow_nat(a, 0), np.eye(4))

    def test_scaled_identity(self):
        np.testing.assert_allclose(mat_pow_nat(2 * I3, 3), 8 * I3, rtol=0)

    def test_nilpotent_squares_to_zero(self):
        j = np.array([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(mat_pow_nat(j, 2), np.zeros((2, 2)))

    def test_negative_exponent_rejected(self):
        with pytest.raises(InvalidInputError):
            mat_pow_nat(I2, -1)


class TestDirichletPow:
    def test_one_is_exact_identity(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(3, 3))
        np.testing.assert_array_equal(dirichlet_pow(1, x), I3)

    def test_two_identity(self):
        np.testing.assert_allclose(dirichlet_pow(2, I2), 2 * I2, rtol=1e-14)

    def test_three_squared(self):
        np.testing.assert_allclose(dirichlet_pow(3, np.diag([2.0])), np.diag([9.0]), rtol=1e-13)

    def test_zero_rejected(self):
        with pytest.raises(InvalidInputError):
            dirichlet_pow(0, I2)


class TestJordan:
    def test_single(self):
        np.testing.assert_array_equal(jordan_block(5.0, 1), np.array([[5.0 + 0j]]))

    def test_two(self):
        np.testing.assert_array_equal(jordan_block(0.0, 2), np.array([[0, 1], [0, 0]], dtype=complex))

    def test_three(self):
        expected = np.array([[-1, 1, 0], [0, -1, 1], [0, 0, -1]], dtype=complex)
        np.testing.assert_array_equal(jordan_block(-1.0, 3), expected)

    def test_oracle_exp_at_zero(self):
        np.testing.assert_allclose(jordan_function_oracle([1.0, 1.0], 2), np.array([[1, 1], [0, 1]]))

    def test_oracle_identity_function(self):
        c = 2.5 + 0.5j
        np.testing.assert_allclose(jordan_function_oracle([c, 1.0], 2), np.array([[c, 1], [0, c]]))

    def test_oracle_square_function(self):
        # f(x) = x^2 at 1: values (1, 2, 2); divided by factorials -> (1, 2, 1).
        out = jordan_function_oracle([1.0, 2.0, 2.0], 3)
        np.testing.assert_allclose(out, np.array([[1, 2, 1], [0, 1, 2], [0, 0, 1]]))

    def test_oracle_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            jordan_function_oracle([], 0)

    def test_oracle_matches_mat_exp_on_blocks(self):
        rng = np.random.default_rng(9)
        for d in range(1, 7):
            lam = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            lam *= min(1.0, 2.0 / abs(lam))
            expected = jordan_function_oracle([np.exp(lam)] * d, d)
            assert spectral_norm(mat_exp(jordan_block(lam, d)) - expected) < 1e-10


class TestClosedForms:
    def test_neumann_zero_matrix(self):
        for n in (1, 3, 10):
            np.testing.assert_allclose(neumann_closed_form(np.zeros((2, 2)), n), I2)

    def test_neumann_half_identity(self):
        np.testing.assert_allclose(neumann_closed_form(0.5 * I2, 2), 1.5 * I2, rtol=1e-15)

    def test_neumann_alternating(self):
        np.testing.assert_allclose(neumann_closed_form(-I2, 3), I2, rtol=1e-15)

    def test_neumann_zero_terms(self):
        np.testing.assert_array_equal(neumann_closed_form(0.5 * I2, 0), np.zeros((2, 2)))

    def test_neumann_singular(self):
        with pytest.raises(SingularOracleError):
            neumann_closed_form(I2, 3)

    def test_neumann_matches_literal_partial_sum(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            d = int(rng.integers(2, 9))
            x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            x *= 0.6 / max(abs(np.linalg.eigvals(x)).max(), 1e-12)
            n = int(rng.integers(5, 51))
            literal = np.zeros((d, d), dtype=complex)
            p = np.eye(d, dtype=complex)
            norm_budget = 0.0
            for _ in range(n):
                literal = literal + p
                norm_budget += spectral_norm(p)
                p = p @ x
            assert spectral_norm(neumann_closed_form(x, n) - literal) <= 1e-12 * norm_budget

    def test_hadamard_zero(self):
        np.testing.assert_allclose(hadamard_closed_form(np.zeros((2, 2)), 5), np.ones((2, 2)))

    def test_hadamard_ones_limit(self):
        np.testing.assert_array_equal(hadamard_closed_form(np.ones((2, 2)), 4), 4 * np.ones((2, 2)))

    def test_hadamard_half(self):
        out = hadamard_closed_form(np.full((2, 2), 0.5), 3)
        np.testing.assert_allclose(out, np.full((2, 2), 1.75), rtol=1e-15)


def test_unit_roundoff():
    assert UNIT_ROUNDOFF == 2.0**-52
