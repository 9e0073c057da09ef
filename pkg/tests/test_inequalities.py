import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmproc.errors import DomainError, ShapeError, SpectralDegeneracy
from pmproc.inequalities import (SeparableOperator, cauchy_average, cauchy_integral_representation,
                                 cauchy_rms_residuals, interpolation_bound, lieb_convexity,
                                 quadrature_inequality, sandwich_trace, verdict)
from pmproc.manifold import OptConfig
from pmproc.quantum import haar_unitary, random_density, weighted_objective
from pmproc.rng import make_rng

from conftest import ginibre


def psd(r, rng):
    G = ginibre(r, rng)
    return G @ G.conj().T


def separable(r, rng, terms=None):
    k = terms or int(rng.integers(1, 4))
    return SeparableOperator(tuple((float(rng.random()), psd(r, rng), psd(r, rng)) for _ in range(k)))


def dense_sandwich(C, D, X, Y):
    XY = np.kron(X, Y)
    return np.trace(C.matrix() @ XY @ D.matrix() @ XY.conj().T).real


class TestVerdict:
    def test_rule(self):
        assert verdict(1.0, 1.0, 0.0).passed
        assert verdict(1.0 + 5e-11, 1.0, 1e-10).passed
        assert not verdict(1.0 + 2e-10, 1.0, 1e-10).passed
        assert verdict(2.0, 3.0, 0.0).slack == 1.0


class TestLieb:
    def test_lambda_zero_equality(self, rng):
        A, B, G1, G2 = psd(3, rng), psd(3, rng), ginibre(3, rng), ginibre(3, rng)
        assert abs(lieb_convexity(A, B, G1, G2, 0.0).slack) <= 1e-12 * 100

    def test_equal_arguments(self, rng):
        A, B, G = psd(3, rng), psd(3, rng), ginibre(3, rng)
        v = lieb_convexity(A, B, G, G, 0.4)
        assert abs(v.slack) <= 1e-12 * max(1, abs(v.rhs))

    def test_campaign(self):
        g = make_rng(1)
        for i in range(1000):
            r = (2, 3, 4)[i % 3]
            assert lieb_convexity(psd(r, g), psd(r, g), ginibre(r, g), ginibre(r, g), g.random()).passed

    def test_non_psd_can_fail(self, rng):
        # with an indefinite A the quadratic form is not convex
        A = np.diag([1.0, -5.0])
        B = np.eye(2)
        G1 = np.diag([0.0, 1.0])
        G2 = -G1
        assert not lieb_convexity(A, B, G1, G2, 0.5).passed

    def test_domain(self, rng):
        with pytest.raises(DomainError):
            lieb_convexity(np.eye(2), np.eye(2), np.eye(2), np.eye(2), 1.5)


class TestQuadrature:
    def test_dense_crosscheck(self, rng):
        for r in (2, 3):
            C, D = separable(r, rng), separable(r, rng)
            X, Y = ginibre(r, rng), ginibre(r, rng)
            assert sandwich_trace(C, D, X, Y) == pytest.approx(dense_sandwich(C, D, X, Y), rel=1e-10)

    def test_y_zero(self, rng):
        C, D, X = separable(2, rng), separable(2, rng), ginibre(2, rng)
        v = quadrature_inequality(C, D, X, np.zeros((2, 2)))
        assert v.lhs == 0.0
        assert v.rhs == pytest.approx(2 * sandwich_trace(C, D, X, X), rel=1e-12)
        assert v.rhs >= 0

    def test_x_equals_y(self, rng):
        C, D, X = separable(3, rng), separable(3, rng), ginibre(3, rng)
        t = sandwich_trace(C, D, X, X)
        v = quadrature_inequality(C, D, X, X)
        assert v.lhs == pytest.approx(2 * t, rel=1e-12)
        assert v.rhs == pytest.approx(10 * t, rel=1e-12)

    def test_campaign(self):
        g = make_rng(2)
        for i in range(1000):
            r = (2, 3)[i % 2]
            assert quadrature_inequality(separable(r, g), separable(r, g), ginibre(r, g), ginibre(r, g)).passed

    def test_bilinear_slack(self, rng):
        C, D, X, Y = separable(2, rng), separable(2, rng), ginibre(2, rng), ginibre(2, rng)
        base = quadrature_inequality(C, D, X, Y).slack
        for a in (0.5, 2.0):
            assert quadrature_inequality(C.scaled(a), D, X, Y).slack == pytest.approx(a * base, rel=1e-10)

    def test_validation(self, rng):
        with pytest.raises(DomainError):
            SeparableOperator(((-1.0, np.eye(2), np.eye(2)),))
        with pytest.raises(DomainError):
            SeparableOperator(((1.0, np.diag([1.0, -1.0]), np.eye(2)),))
        with pytest.raises(ShapeError):
            quadrature_inequality(separable(2, rng), separable(2, rng), np.eye(3), np.eye(3))
        big = SeparableOperator(((1.0, np.eye(9), np.eye(9)),))
        with pytest.raises(ShapeError):
            big.matrix()


class TestCauchy:
    def test_identity_exact(self, rng):
        A = ginibre(3, rng)
        assert cauchy_integral_representation(np.eye(3), A, 1000, rng) == pytest.approx(0.0, abs=1e-14)

    def test_psd_branch(self):
        g = make_rng(10)
        assert cauchy_integral_representation(np.diag([1.0, 0.5]), ginibre(2, g), 10**6, g) <= 1e-2

    def test_negative_branch(self):
        g = make_rng(11)
        assert cauchy_integral_representation(np.diag([1.0, -0.5]), ginibre(2, g), 10**6, g) <= 1e-2

    def test_non_diagonal(self):
        g = make_rng(12)
        W = haar_unitary(3, g)
        K = W @ np.diag([0.9, -0.4, 0.6]) @ W.conj().T
        assert cauchy_integral_representation(K, ginibre(3, g), 200_000, g) <= 2e-2

    def test_rate(self):
        g = make_rng(13)
        rms = cauchy_rms_residuals(np.diag([1.0, 0.5]), ginibre(2, g), [10**4, 10**6], [16, 4], g)
        assert 10 / 2 <= rms[0] / rms[1] <= 10 * 2

    def test_average_elementwise_limit(self, rng):
        # E exp(-i t s) = exp(-|s|) for standard Cauchy t, so entry (i, j) -> k_i k_j A_ij
        K = np.diag([0.8, 0.3])
        A = np.ones((2, 2), dtype=complex)
        avg = cauchy_average(K, A, 400_000, rng)
        assert np.allclose(avg, K @ A @ K, atol=1e-2)

    def test_errors(self, rng):
        with pytest.raises(SpectralDegeneracy):
            cauchy_integral_representation(np.diag([1.0, 0.0]), np.eye(2), 10, rng)
        with pytest.raises(DomainError):
            cauchy_integral_representation(np.diag([2.0, 0.5]), np.eye(2), 10, rng)
        with pytest.raises(DomainError):
            cauchy_integral_representation(np.array([[0.5, 0.2], [0.0, 0.5]]), np.eye(2), 10, rng)


class TestInterpolation:
    OPT = OptConfig(t_max=2000, step=5e-2, restarts=3, grad_tol=1e-9)

    def test_identity_weight(self, rng):
        q, rho, tau = haar_unitary(3, rng), random_density(3, rng), random_density(3, rng)
        v = interpolation_bound(np.eye(3), q, rho, tau, self.OPT)
        assert v.passed and v.lhs == pytest.approx(weighted_objective(q, np.eye(3), rho, tau))

    def test_scaled_unitary(self, rng):
        q, rho, tau = haar_unitary(3, rng), random_density(3, rng), random_density(3, rng)
        c, U = 1.7, haar_unitary(3, rng)
        v = interpolation_bound(c * U, q, rho, tau, self.OPT)
        assert v.passed
        assert v.rhs >= v.lhs - 1e-10

    def test_campaign(self):
        g = make_rng(14)
        for _ in range(15):
            L = ginibre(3, g)
            L *= 2 * g.random() / np.linalg.norm(L, 2)
            v = interpolation_bound(L, haar_unitary(3, g), random_density(3, g), random_density(3, g), self.OPT)
            assert v.passed

    def test_shape(self, rng):
        with pytest.raises(ShapeError):
            interpolation_bound(np.eye(2), np.eye(3), np.eye(3) / 3, np.eye(3) / 3, self.OPT)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.sampled_from([2, 3, 4]), lam=st.floats(0, 1))
def test_lieb_property(seed, r, lam):
    g = make_rng(seed)
    assert lieb_convexity(psd(r, g), psd(r, g), ginibre(r, g), ginibre(r, g), lam).passed


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.sampled_from([2, 3]))
def test_quadrature_property(seed, r):
    g = make_rng(seed)
    C, D = separable(r, g), separable(r, g)
    X, Y = ginibre(r, g), ginibre(r, g)
    v = quadrature_inequality(C, D, X, Y)
    assert v.passed
    assert v.lhs == pytest.approx(dense_sandwich(C, D, X, Y) + dense_sandwich(C, D, Y, X), rel=1e-9)
