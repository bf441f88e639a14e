import math

import numpy as np
import pytest

from divsum import (
    DegeneratePadeError,
    InvalidInputError,
    PoleError,
    eigen_cluster,
    horner_matrix_poly,
    jordan_block,
    mat_exp,
    pade_approximant,
    pade_with_summation,
    schur_parlett_with_summation,
    sequential_poly_sum,
    spectral_norm,
    transformed_coeffs,
    weighted_power_sum,
    weights_b,
)
from divsum.matfunc import (
    ScalarSeqWeights,
    cesaro_weights,
    conventional_weights,
    euler_weights,
    exp_coeffs,
    neumann_coeffs,
)

from .oracles import random_with_radius


class TestWeightAlgebra:
    def test_conventional_suffix_sums(self):
        b = weights_b(conventional_weights(), 5)
        np.testing.assert_allclose(b, np.ones(6))

    def test_euler_row_one(self):
        b = weights_b(euler_weights(1.0), 1)
        np.testing.assert_allclose(b, [0.75, 0.25], rtol=1e-14)

    def test_cesaro_suffix_sums(self):
        n = 10
        b = weights_b(cesaro_weights(), n)
        np.testing.assert_allclose(b, [(n - j) / n for j in range(n + 1)], rtol=1e-14)

    def test_transformed_conventional_recovers_taylor(self):
        a = [1.0, 2.0, 3.0, 4.0]
        h = transformed_coeffs(a, conventional_weights(), 3)
        np.testing.assert_allclose(h, a)

    def test_transformed_cesaro_damps_linearly(self):
        n = 8
        h = transformed_coeffs(lambda k: 1.0, cesaro_weights(), n)
        np.testing.assert_allclose(h, [(n - j) / n for j in range(n + 1)], rtol=1e-14)

    def test_transformed_euler_weighted_expansion(self):
        h = transformed_coeffs([1.0, 1.0], euler_weights(1.0), 1)
        np.testing.assert_allclose(h, [0.75, 0.25], rtol=1e-14)
        # Direct expansion: sum_k c_{1,k} S_k(x) = 1/2 + 1/4 (1 + x) = 3/4 + x/4.
        c = euler_weights(1.0)
        for x in (0.3, -1.7, 2.5):
            lhs = h[0] + h[1] * x
            rhs = complex(c.c_at(1, 0)) * 1.0 + complex(c.c_at(1, 1)) * (1.0 + x)
            assert lhs == pytest.approx(rhs, rel=1e-14)

    @pytest.mark.parametrize(
        "weights",
        [conventional_weights(), cesaro_weights(), euler_weights(1.0), euler_weights(0.5)],
        ids=["conventional", "cesaro", "euler1", "euler05"],
    )
    def test_polynomial_identity(self, weights):
        # sum_j h_j x^j == sum_k c_{n,k} S_k(x) exactly as polynomials.
        rng = np.random.default_rng(50)
        n = 12
        a = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        h = transformed_coeffs(list(a), weights, n)
        for x in rng.normal(size=10):
            powers = x ** np.arange(n + 1)
            lhs = np.sum(h * powers)
            partials = np.cumsum(a * powers)
            row = weights.row(n)
            rhs = np.sum(row * partials)
            assert abs(lhs - rhs) <= 1e-13 * max(abs(rhs), 1.0)


class TestPade:
    def test_exp_1_1_conventional(self):
        approx = pade_approximant(1, 1, exp_coeffs, conventional_weights())
        np.testing.assert_allclose(approx.beta, [1.0, 0.5], atol=1e-14)
        np.testing.assert_allclose(approx.gamma, [1.0, -0.5], atol=1e-14)

    def test_no_denominator_is_damped_polynomial(self):
        rng = np.random.default_rng(51)
        x = random_with_radius(rng, 3, 0.7)
        out = pade_with_summation(x, 4, 0, exp_coeffs, conventional_weights())
        h = transformed_coeffs(exp_coeffs, conventional_weights(), 4)
        np.testing.assert_array_equal(out, horner_matrix_poly(h, x))

    def test_exp_6_6_matches_exponential_kernel(self):
        rng = np.random.default_rng(52)
        for _ in range(10):
            x = random_with_radius(rng, 4, 1.0)
            x = x / max(spectral_norm(x), 1.0)  # enforce norm <= 1
            out = pade_with_summation(x, 6, 6, exp_coeffs, conventional_weights())
            assert spectral_norm(out - mat_exp(x)) <= 1e-10

    def test_taylor_recovery_by_division(self):
        # The [2/2] rational function's power-series coefficients (recovered by
        # dividing out the denominator) match 1/k! through order 4.
        approx = pade_approximant(2, 2, exp_coeffs, conventional_weights())
        beta = list(approx.beta) + [0.0] * 3
        gamma = list(approx.gamma) + [0.0] * 3
        series = []
        for k in range(5):
            v = beta[k] - sum(gamma[j] * series[k - j] for j in range(1, k + 1))
            series.append(v / gamma[0])
        for k, coeff in enumerate(series):
            assert abs(coeff - 1.0 / math.factorial(k)) <= 1e-9

    def test_degenerate_system(self):
        with pytest.raises(DegeneratePadeError):
            pade_approximant(1, 1, lambda k: 0.0, conventional_weights())

    def test_pole_detection(self):
        # exp's [1/1] denominator 1 - x/2 is singular at X = 2I.
        with pytest.raises(PoleError):
            pade_with_summation(2.0 * np.eye(2), 1, 1, exp_coeffs, conventional_weights())


class TestEigenCluster:
    def test_threshold_split(self):
        pattern = eigen_cluster([0.0, 1e-12, 5.0], 0.1)
        assert pattern.sizes == (2, 1)
        assert pattern.assignment == (0, 0, 1)

    def test_all_equal_single_cluster(self):
        pattern = eigen_cluster([2.0, 2.0, 2.0], 0.5)
        assert pattern.sizes == (3,)

    def test_transitive_chaining(self):
        pattern = eigen_cluster([0.0, 0.06, 0.12], 0.1)
        assert pattern.sizes == (3,)

    def test_positive_delta_required(self):
        with pytest.raises(InvalidInputError):
            eigen_cluster([1.0], 0.0)


class TestSchurParlett:
    def test_diagonal_matrix_exponential(self):
        rng = np.random.default_rng(53)
        lam = rng.uniform(-1.0, 1.0, size=6)
        x = np.diag(lam).astype(complex)
        out = schur_parlett_with_summation(x, 30, exp_coeffs, conventional_weights())
        np.testing.assert_allclose(np.diag(out), np.exp(lam), atol=1e-10)
        assert spectral_norm(out - np.diag(np.exp(lam))) <= 1e-10

    def test_normal_matrix_matches_horner(self):
        rng = np.random.default_rng(54)
        d, n = 20, 30
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        lam = rng.uniform(-1.5, 1.5, size=d) + 1j * rng.uniform(-1.0, 1.0, size=d)
        x = q @ np.diag(lam) @ q.conj().T
        direct = horner_matrix_poly(transformed_coeffs(exp_coeffs, conventional_weights(), n), x)
        out = schur_parlett_with_summation(x, n, exp_coeffs, conventional_weights())
        assert spectral_norm(out - direct) <= 1e-8 * spectral_norm(direct)

    def test_nilpotent_jordan_block(self):
        out = schur_parlett_with_summation(jordan_block(0.0, 2), 10, exp_coeffs, conventional_weights())
        np.testing.assert_allclose(out, np.array([[1, 1], [0, 1]]), atol=1e-10)

    def test_similarity_invariance(self):
        rng = np.random.default_rng(55)
        d, n = 12, 24
        qh, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        lam = rng.uniform(-1.0, 1.0, size=d) + 1j * rng.uniform(-0.5, 0.5, size=d)
        qx, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        x = qx @ np.diag(lam) @ qx.conj().T
        fx = schur_parlett_with_summation(x, n, exp_coeffs, conventional_weights())
        fy = schur_parlett_with_summation(qh @ x @ qh.conj().T, n, exp_coeffs, conventional_weights())
        assert spectral_norm(fy - qh @ fx @ qh.conj().T) <= 1e-8 * max(spectral_norm(fx), 1.0)

    def test_euler_weights_outside_taylor_domain(self):
        x = -2.0 * np.eye(3)
        out = schur_parlett_with_summation(x, 60, neumann_coeffs, euler_weights(1.0))
        target = np.linalg.solve(np.eye(3) - x, np.eye(3))
        assert spectral_norm(out - target) <= 1e-6 * spectral_norm(target)


class TestLongWeightedSums:
    def test_weighted_power_sum_matches_horner(self):
        rng = np.random.default_rng(56)
        x = random_with_radius(rng, 4, 0.6)
        h = rng.normal(size=40) + 1j * rng.normal(size=40)
        a = weighted_power_sum(x, h)
        b = horner_matrix_poly(list(h), x)
        assert spectral_norm(a - b) <= 1e-13 * max(spectral_norm(b), 1.0)

    def test_cesaro_truncation_reaches_inverse(self):
        rng = np.random.default_rng(57)
        x = random_with_radius(rng, 5, 0.5)
        target = np.linalg.solve(np.eye(5) - x, np.eye(5))
        n = 2_000_000
        out = sequential_poly_sum(x, neumann_coeffs, cesaro_weights(), n)
        assert spectral_norm(out - target) <= 1e-6 * spectral_norm(target)

    def test_euler_route_matches_generic_route(self):
        rng = np.random.default_rng(58)
        x = random_with_radius(rng, 3, 0.8)
        n = 24
        generic = weighted_power_sum(x, transformed_coeffs(neumann_coeffs, euler_weights(1.0), n))
        stable = sequential_poly_sum(x, neumann_coeffs, euler_weights(1.0), n)
        assert spectral_norm(generic - stable) <= 1e-11
