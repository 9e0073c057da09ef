"""Numerical oracles for the trace inequalities behind the ratio bound."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ShapeError, SpectralDegeneracy
from .frames import operator_norm
from .manifold import OptConfig, ascend, polar_unitary
from .quantum import _same_dim, haar_unitary, weighted_objective
from .rng import make_rng


@dataclass(frozen=True)
class IneqVerdict:
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float


def verdict(lhs: float, rhs: float, tol: float) -> IneqVerdict:
    slack = rhs - lhs
    return IneqVerdict(float(lhs), float(rhs), float(slack), bool(slack >= -tol * max(1.0, abs(rhs))), tol)


def _tr(M) -> float:
    return float(np.trace(M).real)


def lieb_convexity(A, B, G1, G2, lam: float, tol: float = 1e-10) -> IneqVerdict:
    """tr(A G B G^dagger) <= lam tr(A G1 B G1^dagger) + (1 - lam) tr(A G2 B G2^dagger)."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    _same_dim((A, "A"), (B, "B"), (G1, "G1"), (G2, "G2"))

    def q(G):
        return _tr(A @ G @ B @ G.conj().T)

    G = lam * G1 + (1.0 - lam) * G2
    return verdict(q(G), lam * q(G1) + (1.0 - lam) * q(G2), tol)


@dataclass(frozen=True)
class SeparableOperator:
    """sum_i lam_i A_i (x) B_i with lam_i >= 0 and A_i, B_i PSD, kept factored."""

    terms: tuple

    def __post_init__(self):
        for lam, A, B in self.terms:
            if lam < 0:
                raise DomainError("separable weights must be nonnegative")
            for M in (A, B):
                if np.linalg.eigvalsh(0.5 * (M + M.conj().T)).min() < -1e-10:
                    raise DomainError("separable factors must be PSD")

    @property
    def r(self) -> int:
        return self.terms[0][1].shape[0]

    def scaled(self, alpha: float) -> "SeparableOperator":
        return SeparableOperator(tuple((alpha * lam, A, B) for lam, A, B in self.terms))

    def matrix(self) -> np.ndarray:
        if self.r > 8:
            raise ShapeError("dense materialisation is limited to r <= 8")
        return sum(lam * np.kron(A, B) for lam, A, B in self.terms)


def sandwich_trace(C: SeparableOperator, D: SeparableOperator, X, Y) -> float:
    """tr(C (X (x) Y) D (X (x) Y)^dagger) evaluated term by term."""
    total = 0.0
    for lc, C1, C2 in C.terms:
        for ld, D1, D2 in D.terms:
            total += lc * ld * _tr(C1 @ X @ D1 @ X.conj().T) * _tr(C2 @ Y @ D2 @ Y.conj().T)
    return total


def quadrature_inequality(C: SeparableOperator, D: SeparableOperator, X, Y,
                          tol: float = 1e-9) -> IneqVerdict:
    """Symmetrised sandwich bounded by conjugations with X +- Y, X and Y."""
    r = C.r
    if D.r != r or np.shape(X) != (r, r) or np.shape(Y) != (r, r):
        raise ShapeError("C, D, X, Y must all act on the same r-dimensional space")
    lhs = sandwich_trace(C, D, X, Y) + sandwich_trace(C, D, Y, X)

    def ad(J):
        return sandwich_trace(C, D, J, J)

    rhs = 0.5 * (ad(X + Y) + ad(X - Y)) + ad(X) + ad(Y)
    return verdict(lhs, rhs, tol)


def _check_contraction(K):
    K = np.asarray(K, dtype=complex)
    if np.linalg.norm(K - K.conj().T) > 1e-10 * max(1.0, np.linalg.norm(K)):
        raise DomainError("K must be Hermitian")
    k, W = np.linalg.eigh(0.5 * (K + K.conj().T))
    if np.abs(k).max() > 1.0 + 1e-10:
        raise DomainError("K must have operator norm <= 1")
    if np.abs(k).min() < 1e-8:
        raise SpectralDegeneracy("K has an eigenvalue of magnitude below 1e-8")
    return k, W


def cauchy_average(K, A, samples: int, rng: np.random.Generator, batch: int = 1 << 16) -> np.ndarray:
    """Monte-Carlo mean of |K|^{-it} D A D |K|^{-it} with t standard Cauchy."""
    k, W = _check_contraction(K)
    x = np.log(np.abs(k))
    sign = np.sign(k)
    Wh = W.conj().T
    # in the eigenbasis D is diag(sign) and |K|^{-it} is diag(exp(-i t x))
    B = (sign[:, None] * (Wh @ A @ W)) * sign[None, :]
    s = (x[:, None] + x[None, :]).ravel()
    acc = np.zeros(s.size, dtype=complex)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        t = np.tan(np.pi * (rng.random(b) - 0.5))
        acc += np.exp(-1j * np.outer(t, s)).sum(axis=0)
        done += b
    M = (acc / samples).reshape(B.shape) * B
    return W @ M @ Wh


def cauchy_integral_representation(K, A, samples: int, rng: np.random.Generator) -> float:
    """Relative Frobenius gap between the Cauchy average and K A K."""
    K = np.asarray(K, dtype=complex)
    A = np.asarray(A, dtype=complex)
    target = K @ A @ K
    avg = cauchy_average(K, A, samples, rng)
    return float(np.linalg.norm(avg - target) / max(1.0, np.linalg.norm(target)))


def best_pm_value(rho, tau, opt: OptConfig, starts=()) -> float:
    """Best objective over U(r) found by ascent from ``starts`` plus Haar restarts."""
    r = rho.shape[0]
    inits = list(starts) + [haar_unitary(r, make_rng(opt.seed, 2, j)) for j in range(opt.restarts)]
    return max(ascend(rho, tau, U0, opt).best_value for U0 in inits)


def interpolation_bound(L, q, rho, tau, opt: OptConfig, tol: float = 1e-8,
                        retry_factor: int = 5) -> IneqVerdict:
    """tr(rho Q_L[tau]) <= ||L||^4 max_Z tr(rho Z[tau]), max found by ascent.

    The ascent is started from q, from the polar factor of L applied to q and
    from Haar restarts; a failure is retried once with ``retry_factor`` times
    the restarts since the ascent only bounds the maximum from below.
    """
    _same_dim((L, "L"), (q, "q"), (rho, "rho"), (tau, "tau"))
    lhs = weighted_objective(q, L, rho, tau)
    scale = operator_norm(L) ** 4
    starts = [np.asarray(q, dtype=complex)]
    if scale > 0:
        starts.append(polar_unitary(L) @ q)
    out = verdict(lhs, scale * best_pm_value(rho, tau, opt, starts), tol)
    if not out.passed and retry_factor > 1:
        wider = replace(opt, restarts=opt.restarts * retry_factor)
        out = verdict(lhs, scale * best_pm_value(rho, tau, wider, starts), tol)
    return out


def cauchy_rms_residuals(K, A, sizes, reps, rng: np.random.Generator) -> np.ndarray:
    """Root-mean-square residual over ``reps[i]`` independent runs at ``sizes[i]`` samples.

    Under the samples^{-1/2} rate the ratio between two sizes a decade apart
    is close to sqrt(10).
    """
    out = []
    for size, k in zip(sizes, reps):
        res = [cauchy_integral_representation(K, A, int(size), rng) for _ in range(int(k))]
        out.append(float(np.sqrt(np.mean(np.square(res)))))
    return np.array(out)
