"""Gaussian randomisation of weight lists and Monte-Carlo checks around it.

L_hat = sum_t g_t L_t with g_t i.i.d. real N(0, 1).  The checks here compare
exact left-hand sides with Monte-Carlo estimates using a one-sided 3-sigma
slack on the estimated side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .frames import WeightList, operator_norm, variance_matrix
from .quantum import _outcome_probs
from .rng import NORMAL_SAMPLER

SIGMAS = 3.0


@dataclass(frozen=True)
class GaussianWeightSample:
    matrix: np.ndarray
    coefficients: np.ndarray


@dataclass(frozen=True)
class MCReport:
    lhs: float
    rhs_mean: float
    rhs_stderr: float
    samples: int
    passed: bool
    constant: float = 1.0
    seed: object = None
    sampler: str = NORMAL_SAMPLER


@dataclass(frozen=True)
class TailReport:
    levels: np.ndarray
    empirical_tail: np.ndarray
    bound: np.ndarray
    violations: int
    variance_statistic: float
    samples: int


def sample_Lhat(wl: WeightList, rng: np.random.Generator) -> GaussianWeightSample:
    g = rng.standard_normal(wl.T)
    return GaussianWeightSample(np.tensordot(g, wl.weights, axes=1), g)


def sample_Lhats(wl: WeightList, samples: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A stack of ``samples`` draws of L_hat together with their coefficients."""
    g = rng.standard_normal((samples, wl.T))
    return np.tensordot(g, wl.weights, axes=1), g


def variance_statistic(wl: WeightList) -> float:
    """max(||sum L L^dagger||, ||sum L^dagger L||)."""
    LLh = np.einsum("tij,tkj->ik", wl.weights, wl.weights.conj())
    return max(operator_norm(LLh), operator_norm(variance_matrix(wl)))


def _weighted_batch(q, Ls, rho, tau):
    """tr(rho Q_L[tau]) for every L in the stack ``Ls``."""
    W = Ls @ q
    a = np.einsum("bji,jk,bki->bi", W.conj(), rho, W).real
    b = np.einsum("bji,jk,bki->bi", W.conj(), tau, W).real
    return np.sum(a * b, axis=1)


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def weighted_sum(wl: WeightList, q, rho, tau) -> float:
    """sum_t tr(rho Q_{L_t}[tau])."""
    return float(_weighted_batch(q, wl.weights, rho, tau).sum())


def verify_factor3(wl: WeightList, q, rho, tau, samples: int,
                   rng: np.random.Generator, seed=None, batch: int = 4096) -> MCReport:
    """sum_t tr(rho Q_{L_t}[tau]) <= 3 E tr(rho Q_{L_hat}[tau])."""
    if samples < 100:
        raise DomainError("verify_factor3 needs at least 100 samples")
    lhs = weighted_sum(wl, q, rho, tau)
    vals = np.concatenate([
        _weighted_batch(q, sample_Lhats(wl, min(batch, samples - i), rng)[0], rho, tau)
        for i in range(0, samples, batch)
    ])
    mean, se = _mean_stderr(vals)
    return MCReport(lhs, mean, se, samples, bool(lhs <= 3.0 * (mean + SIGMAS * se)), 3.0, seed)


def biweighted_expectation(wl: WeightList, q, rho, tau) -> float:
    """Exact E over independent L_hat, B_hat of the biweighted objective.

    Equals sum_{t,z} sum_i tr(rho L_t Q_i L_t^dagger) tr(tau L_z Q_i L_z^dagger).
    """
    W = wl.weights @ q
    a = np.einsum("tji,jk,tki->ti", W.conj(), rho, W).real
    b = np.einsum("tji,jk,tki->ti", W.conj(), tau, W).real
    return float(a.sum(axis=0) @ b.sum(axis=0))


def biweighted_mc(wl: WeightList, q, rho, tau, samples: int,
                  rng: np.random.Generator) -> tuple[float, float]:
    Ls, _ = sample_Lhats(wl, samples, rng)
    Bs, _ = sample_Lhats(wl, samples, rng)
    a = np.einsum("bji,jk,bki->bi", (Ls @ q).conj(), rho, Ls @ q).real
    b = np.einsum("bji,jk,bki->bi", (Bs @ q).conj(), tau, Bs @ q).real
    return _mean_stderr(np.sum(a * b, axis=1))


def _opnorms(Ls: np.ndarray) -> np.ndarray:
    return np.linalg.svd(Ls, compute_uv=False)[:, 0]


def tail_bound(levels, r: int, nu: float, exponent_scale: float = 2.0) -> np.ndarray:
    """min(1, 2 r exp(-l^2 / (exponent_scale * nu)))."""
    levels = np.asarray(levels, dtype=float)
    return np.minimum(1.0, 2.0 * r * np.exp(-levels**2 / (exponent_scale * nu)))


def empirical_tail(wl: WeightList, levels, samples: int, rng: np.random.Generator,
                   exponent_scale: float = 2.0) -> TailReport:
    """Empirical P(||L_hat|| > l) against the matrix-Gaussian series tail bound.

    The bound is 2 r exp(-l^2 / (2 nu)).  ``exponent_scale=1`` gives the
    sharper-looking form without the factor 2, which real Gaussian series do
    not satisfy (already for a single scalar term).  A level is a violation when the
    empirical fraction exceeds the bound by more than 3 binomial standard
    deviations, with the bound floored at 1/samples inside the deviation.
    """
    levels = np.asarray(levels, dtype=float)
    if samples < 1000:
        raise DomainError("empirical_tail needs at least 1000 samples")
    if np.any(levels < 0) or np.any(np.diff(levels) <= 0):
        raise DomainError("levels must be nonnegative and increasing")
    Ls, _ = sample_Lhats(wl, samples, rng)
    norms = _opnorms(Ls)
    emp = np.array([(norms > l).mean() for l in levels])
    nu = variance_statistic(wl)
    bound = tail_bound(levels, wl.r, nu, exponent_scale)
    p = np.maximum(bound, 1.0 / samples)
    slack = SIGMAS * np.sqrt(p * (1.0 - np.minimum(p, 1.0)) / samples)
    violations = int(np.sum(emp > bound + slack))
    return TailReport(levels, emp, bound, violations, nu, samples)


def estimate_fourth_moment(wl: WeightList, samples: int,
                           rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo E ||L_hat||^4."""
    if samples < 1000:
        raise DomainError("estimate_fourth_moment needs at least 1000 samples")
    Ls, _ = sample_Lhats(wl, samples, rng)
    return _mean_stderr(_opnorms(Ls) ** 4)


@dataclass(frozen=True)
class MomentCheck:
    passed: bool
    max_z: float
    threshold: float
    entries: int


def check_Lhat_moments(wl: WeightList, samples: int, rng: np.random.Generator,
                       family_alpha: float = 0.0027) -> MomentCheck:
    """Monte-Carlo test of E[L_hat] = 0 and E[L_hat L_hat^dagger] = I.

    Every real and imaginary entry gets a two-sided z-test; the threshold is
    Bonferroni-corrected so the whole family has the false-alarm rate of a
    single 3-sigma test.  Entries with no sampling variance (imaginary
    diagonal of L_hat L_hat^dagger) must match exactly up to rounding.
    """
    from scipy.stats import norm

    r = wl.r
    Ls, _ = sample_Lhats(wl, samples, rng)
    pairs = ((Ls, np.zeros((r, r))), (Ls @ Ls.conj().transpose(0, 2, 1), np.eye(r)))
    zs, exact_ok = [], True
    for stat, target in pairs:
        for part in (np.real, np.imag):
            x = part(stat)
            dev = np.abs(x.mean(axis=0) - part(target))
            se = x.std(axis=0, ddof=1) / math.sqrt(samples)
            live = se > 1e-12
            exact_ok &= bool(np.all(dev[~live] <= 1e-10))
            zs.append(dev[live] / se[live])
    z = np.concatenate(zs)
    threshold = float(norm.isf(family_alpha / (2 * z.size)))
    max_z = float(z.max()) if z.size else 0.0
    return MomentCheck(exact_ok and max_z <= threshold, max_z, threshold, int(z.size))
