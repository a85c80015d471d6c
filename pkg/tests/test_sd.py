"""Schwinger-Dyson verifier: quadrature, Monte Carlo, identities, dictionary."""

import numpy as np
import pytest

from melonfield.errors import DomainError, SignProblemError
from melonfield.model import ModelParams, semicircle_law
from melonfield.sd import (
    MONTE_CARLO,
    QUADRATURE,
    ShiftedModel,
    correlator_mc,
    correlator_quadrature,
    factorization_check,
    quartic_scalar_moment,
    sd_residual_exact,
    sd_residual_leading,
    tensor_side_check,
)

PARAMS = ModelParams(colors=3, size=1, coupling=0.05)


def model(colors=3, size=1, coupling=0.05) -> ShiftedModel:
    return ShiftedModel(ModelParams(colors=colors, size=size, coupling=coupling))


class TestShiftedModel:
    def test_scaling_factor(self):
        assert model(size=1).nu == 1.0
        assert ShiftedModel(ModelParams(3, 4, 0.1)).nu == 2.0

    def test_dense_cap(self):
        with pytest.raises(DomainError):
            ShiftedModel(ModelParams(colors=3, size=17, coupling=0.1))

    def test_gradient_vanishes_at_origin(self):
        # the linear action terms cancel through the collapse-point identity
        m = ShiftedModel(ModelParams(3, 2, 0.1))
        base = [np.zeros((2, 2), dtype=complex) for _ in range(3)]
        eps = 1e-6
        directions = [np.array([[1, 0], [0, 0]]), np.array([[0, 1], [1, 0]]),
                      np.array([[0, -1j], [1j, 0]])]
        for c in range(3):
            for h in directions:
                plus = [b.copy() for b in base]
                minus = [b.copy() for b in base]
                plus[c] = plus[c] + eps * h
                minus[c] = minus[c] - eps * h
                grad = (m.action(plus) - m.action(minus)) / (2 * eps)
                assert abs(grad) < 1e-9

    def test_partial_trace(self):
        m = ShiftedModel(ModelParams(3, 2, 0.1))
        big = np.eye(8)
        for c in range(3):
            ptr = m.partial_trace_except(big, c)
            assert np.allclose(ptr, 4.0 * np.eye(2))
        # one embedded factor traces back to N^(D-1) times itself
        mat = np.array([[1.0, 2.0], [2.0, -1.0]])
        ptr = m.partial_trace_except(m.embed(1, mat), 1)
        assert np.allclose(ptr, 4.0 * mat)

    def test_embedding_commutes_with_sum_trace(self):
        m = ShiftedModel(ModelParams(3, 2, 0.1))
        mat = np.diag([0.5, -0.25])
        assert abs(np.trace(m.embed(0, mat)) - 4 * np.trace(mat)) < 1e-14


class TestQuadratureCorrelators:
    def test_gaussian_limit_second_moment(self):
        est = correlator_quadrature(model(coupling=0.0), (2, 0, 0))
        assert est.method == QUADRATURE
        assert abs(est.value - 1.0) < 1e-12

    def test_gaussian_limit_odd_moment(self):
        est = correlator_quadrature(model(coupling=0.0), (1, 0, 0))
        assert abs(est.value) < 1e-14

    def test_change_of_variables_identity(self):
        m = model()
        original = correlator_quadrature(m, (1, 0, 0), variables="original")
        shifted = correlator_quadrature(m, (1, 0, 0), variables="shifted")
        assert abs(original.value - (shifted.value + m.alpha)) < 1e-8

    def test_requires_scalar_reduction(self):
        with pytest.raises(DomainError):
            correlator_quadrature(model(size=2), (2, 0, 0))

    def test_exponent_validation(self):
        with pytest.raises(DomainError):
            correlator_quadrature(model(), (2, 0))
        with pytest.raises(DomainError):
            correlator_quadrature(model(), (-1, 0, 0))


class TestExactIdentity:
    def test_quadrature_residuals_small_ks(self):
        m = model()
        for c in range(3):
            for k in range(3):
                entry = sd_residual_exact(m, c, k, estimator=QUADRATURE)
                assert entry.normalized <= 1e-6

    def test_gaussian_k0_reduces_to_odd_moment(self):
        entry = sd_residual_exact(model(coupling=0.0), 0, 0, estimator=QUADRATURE)
        assert abs(entry.residual) < 1e-13

    def test_validation(self):
        with pytest.raises(DomainError):
            sd_residual_exact(model(), 5, 0)
        with pytest.raises(DomainError):
            sd_residual_exact(model(), 0, -1)
        with pytest.raises(DomainError):
            sd_residual_exact(model(), 0, 0, estimator="bogus")


class TestLeadingIdentity:
    def test_semicircle_second_moment_closes_k1(self):
        # with the limiting-law inputs the k = 1 identity closes exactly:
        # the pair term is N^2 and N(1-alpha^2) <Tr M^2> = N^2 s / s
        for n in (2, 8, 32):
            s = semicircle_law(3, 0.1).scale
            pair_term = n * n
            law_term = n * s * (n / s)
            assert abs(pair_term - law_term) < 1e-9

    def test_finite_n_leading_residual_is_suppressed_but_nonzero(self):
        entry = sd_residual_leading(model(), 0, 1, estimator=QUADRATURE)
        assert 1e-6 < entry.normalized < 0.1


class TestMonteCarlo:
    def test_gaussian_matrix_second_moment(self):
        m = model(size=2, coupling=0.0)
        est = correlator_mc(m, ((0, 2),), chains=4, steps=20000, seed=7)
        assert est.method == MONTE_CARLO
        assert est.phase_mean > 0.999  # real weight at zero coupling
        assert abs(est.value.real / 2 - 1.0) <= 3 * est.std_error / 2 + 0.02

    def test_trace_expectation_near_zero(self):
        m = model(size=2, coupling=0.05)
        est = correlator_mc(m, ((0, 1),), chains=4, steps=30000, seed=3)
        assert abs(est.value) <= 3 * est.std_error + 0.05

    def test_scalar_mc_matches_quadrature(self):
        m = model()
        mc = correlator_mc(m, ((0, 2),), chains=4, steps=60000, seed=3)
        qd = correlator_quadrature(m, (2, 0, 0))
        assert abs(mc.value - qd.value) <= 3 * mc.std_error

    def test_determinism(self):
        m = model(size=2, coupling=0.05)
        a = correlator_mc(m, ((0, 2),), chains=2, steps=5000, seed=9)
        b = correlator_mc(m, ((0, 2),), chains=2, steps=5000, seed=9)
        assert a.value == b.value
        assert a.std_error == b.std_error
        assert a.phase_mean == b.phase_mean

    def test_thread_pool_reduction_matches_sequential(self):
        m = model(size=2, coupling=0.05)
        seq = correlator_mc(m, ((0, 2),), chains=2, steps=4000, seed=9)
        par = correlator_mc(m, ((0, 2),), chains=2, steps=4000, seed=9, threads=2)
        assert seq.value == par.value

    def test_sign_problem_guard(self):
        # an inflated collapse point makes the linear-term phase wild while
        # the magnitude weight stays tame, tripping the diagnostic
        m = model(size=2, coupling=0.05)
        m.alpha = -25j
        with pytest.raises(SignProblemError) as info:
            correlator_mc(m, ((0, 2),), chains=2, steps=4000, seed=1)
        assert info.value.phase_mean < 0.05

    def test_exact_identity_via_mc_n2(self):
        m = model(size=2, coupling=0.05)
        entry = sd_residual_exact(
            m, 0, 1, estimator=MONTE_CARLO, chains=4, steps=20000, seed=11
        )
        assert abs(entry.residual) <= 3 * entry.std_error
        assert entry.phase_mean > 0.9

    def test_word_validation(self):
        with pytest.raises(DomainError):
            correlator_mc(model(), ((7, 2),), steps=100)


class TestFactorization:
    def test_deterministic_zero_power(self):
        report = factorization_check(model(size=2, coupling=0.05), 0, 2)
        assert report.connected == 0j
        assert report.normalized == 0j

    def test_gaussian_variance_oracle(self):
        # Wick pairing for weight exp(-(N/2) Tr M^2): Var(Tr M^2) = 2 at any N
        m = model(size=2, coupling=0.0)
        report = factorization_check(m, 2, 2, chains=4, steps=30000, seed=5)
        assert abs(report.connected.real - 2.0) <= 3 * report.std_error + 0.1

    def test_suppression_with_n(self):
        small = factorization_check(model(size=2), 2, 2, chains=4, steps=30000, seed=42)
        large = factorization_check(model(size=4), 2, 2, chains=4, steps=30000, seed=42)
        assert abs(large.normalized) < abs(small.normalized)


class TestTensorSide:
    def test_p0_both_sides_one(self):
        report = tensor_side_check(PARAMS, 0)
        assert report.tensor_side == 1.0
        assert abs(report.matrix_side - 1.0) < 1e-12

    def test_gaussian_radial_moment(self):
        # weight exp(-|T|^2/2) over the complex plane gives <|T|^2> = 2
        assert abs(quartic_scalar_moment(1, 0.0) - 2.0) < 1e-10

    def test_dictionary_agreement(self):
        for p in (1, 2):
            report = tensor_side_check(PARAMS, p, tolerance=1e-9)
            assert report.difference < 1e-6
            assert report.matrix_coupling == 4 * PARAMS.coupling

    def test_validation(self):
        with pytest.raises(DomainError):
            tensor_side_check(ModelParams(3, 2, 0.05), 1)
        with pytest.raises(DomainError):
            tensor_side_check(ModelParams(3, 1, 0.0), 1)
