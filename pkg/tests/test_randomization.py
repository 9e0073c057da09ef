import math

import numpy as np
import pytest
from scipy.stats import norm

from pmproc.errors import DomainError
from pmproc.frames import build_weights, canonical_frame, project_frame
from pmproc.quantum import (Subspace, biweighted_objective, haar_unitary, maximally_mixed,
                            objective, random_density, weighted_objective)
from pmproc.randomization import (biweighted_expectation, biweighted_mc, check_Lhat_moments,
                                  empirical_tail, estimate_fourth_moment, sample_Lhat, sample_Lhats,
                                  tail_bound, variance_statistic, verify_factor3, weighted_sum)
from pmproc.rng import make_rng


def random_wl(n, r, rng):
    fr = project_frame(haar_unitary(n, rng), Subspace.canonical(n, r))
    return build_weights(fr, rng.permutation(fr.m), rng.uniform(0, 2 * np.pi, fr.m))


class TestSampling:
    def test_canonical_is_scalar(self, rng):
        s = sample_Lhat(build_weights(canonical_frame(3, 3)), rng)
        assert np.allclose(s.matrix, s.coefficients[0] * np.eye(3))

    def test_linear_in_coefficients(self, rng):
        wl = random_wl(9, 3, rng)
        Ls, g = sample_Lhats(wl, 5, rng)
        for L, c in zip(Ls, g):
            assert np.allclose(L, sum(ct * Lt for ct, Lt in zip(c, wl.weights)))

    def test_moments(self):
        g = make_rng(17)
        for i in range(6):
            chk = check_Lhat_moments(random_wl(4 * (i + 2), (2, 3, 4)[i % 3], g), 100_000, g)
            assert chk.passed, chk

    def test_moment_check_detects_bias(self, rng):
        wl = random_wl(8, 2, rng)
        shifted = type(wl)(wl.T, wl.weights * 1.05, wl.perm, wl.phases)
        assert not check_Lhat_moments(shifted, 100_000, rng).passed


class TestVarianceStatistic:
    def test_canonical(self):
        assert variance_statistic(build_weights(canonical_frame(4, 2))) == pytest.approx(1.0)

    def test_lower_bound(self, rng):
        for _ in range(50):
            assert variance_statistic(random_wl(int(rng.integers(4, 20)), 3, rng)) >= 1 - 1e-8


class TestFactor3:
    def test_canonical_ratio_nine(self):
        g = make_rng(4)
        rho, tau, q = random_density(3, g), random_density(3, g), haar_unitary(3, g)
        rep = verify_factor3(build_weights(canonical_frame(3)), q, rho, tau, 100_000, g)
        assert rep.lhs == pytest.approx(objective(q, rho, tau), abs=1e-14)
        # E tr(rho Q_{gI}[tau]) = E[g^4] lhs = 3 lhs
        assert abs(rep.rhs_mean - 3 * rep.lhs) <= 3 * rep.rhs_stderr
        assert rep.passed

    def test_maximally_mixed(self, rng):
        wl = random_wl(12, 3, rng)
        I = maximally_mixed(3)
        assert verify_factor3(wl, haar_unitary(3, rng), I, I, 2000, rng).passed

    def test_weighted_sum_matches_objective(self, rng):
        wl = random_wl(10, 2, rng)
        q, rho, tau = haar_unitary(2, rng), random_density(2, rng), random_density(2, rng)
        ref = sum(weighted_objective(q, L, rho, tau) for L in wl.weights)
        assert weighted_sum(wl, q, rho, tau) == pytest.approx(ref, abs=1e-14)

    def test_campaign(self):
        g = make_rng(50)
        for i in range(12):
            n, r = [(8, 2), (12, 3), (16, 4)][i % 3]
            wl = random_wl(n, r, g)
            rep = verify_factor3(wl, haar_unitary(r, g), random_density(r, g), random_density(r, g),
                                 10_000, g)
            assert rep.passed

    def test_min_samples(self, rng):
        with pytest.raises(DomainError):
            verify_factor3(build_weights(canonical_frame(2)), np.eye(2), np.eye(2) / 2,
                           np.eye(2) / 2, 10, rng)


class TestBiweighted:
    def test_exact_formula(self, rng):
        wl = random_wl(6, 2, rng)
        q, rho, tau = haar_unitary(2, rng), random_density(2, rng), random_density(2, rng)
        ref = sum(biweighted_objective(q, L, B, rho, tau) for L in wl.weights for B in wl.weights)
        assert biweighted_expectation(wl, q, rho, tau) == pytest.approx(ref, abs=1e-13)

    def test_monte_carlo(self, rng):
        wl = random_wl(8, 2, rng)
        q, rho, tau = haar_unitary(2, rng), random_density(2, rng), random_density(2, rng)
        exact = biweighted_expectation(wl, q, rho, tau)
        mean, se = biweighted_mc(wl, q, rho, tau, 50_000, rng)
        assert abs(mean - exact) <= 3 * se


class TestTail:
    def test_level_zero(self, rng):
        rep = empirical_tail(random_wl(8, 2, rng), [0.0, 1.0], 2000, rng)
        assert rep.empirical_tail[0] == 1.0 and rep.bound[0] == 1.0

    def test_canonical_scalar_oracle(self):
        g = make_rng(8)
        levels = np.linspace(0.25, 3.0, 12)
        N = 100_000
        rep = empirical_tail(build_weights(canonical_frame(2)), levels, N, g)
        p = 2 * norm.sf(levels)
        assert np.all(np.abs(rep.empirical_tail - p) <= 3 * np.sqrt(p * (1 - p) / N))

    def test_campaign(self):
        g = make_rng(81)
        levels = np.linspace(0.5, 5.0, 10)
        for i in range(8):
            r = (2, 3, 4, 6)[i % 4]
            rep = empirical_tail(random_wl(r * int(g.integers(2, 9)), r, g), levels, 10_000, g)
            assert rep.violations == 0

    def test_scalar_counterexample_for_unhalved_exponent(self):
        # for a single real Gaussian P(|g| > l) = 2 Phi(-l), which exceeds 2 exp(-l^2) for large l
        levels = np.array([2.0, 2.5, 3.0])
        loose = tail_bound(levels, 1, 1.0, exponent_scale=1.0)
        assert np.all(2 * norm.sf(levels) > loose)
        assert np.all(2 * norm.sf(levels) <= tail_bound(levels, 1, 1.0))

    def test_validation(self, rng):
        wl = build_weights(canonical_frame(2))
        with pytest.raises(DomainError):
            empirical_tail(wl, [1.0], 10, rng)
        with pytest.raises(DomainError):
            empirical_tail(wl, [2.0, 1.0], 2000, rng)


class TestFourthMoment:
    def test_canonical(self):
        g = make_rng(3)
        mean, se = estimate_fourth_moment(build_weights(canonical_frame(3)), 200_000, g)
        assert abs(mean - 3.0) <= 3 * se

    def test_jensen_floor(self, rng):
        for _ in range(5):
            mean, se = estimate_fourth_moment(random_wl(16, 4, rng), 5000, rng)
            assert mean + 3 * se >= 1.0

    def test_min_samples(self, rng):
        with pytest.raises(DomainError):
            estimate_fourth_moment(build_weights(canonical_frame(2)), 10, rng)
