"""States, projective measurements and the measurement objectives.

A projective measurement on C^n is stored as an n x n unitary ``U``; outcome
``i`` is the rank-one projector onto column ``U[:, i]``.  Density matrices are
plain complex ndarrays.  All functions are pure and never modify their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, ShapeError

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10


def _square(M: np.ndarray, name: str) -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {M.shape}")
    return M.shape[0]


def _same_dim(*pairs: tuple[np.ndarray, str]) -> int:
    dims = {name: _square(np.asarray(M), name) for M, name in pairs}
    if len(set(dims.values())) != 1:
        raise ShapeError(f"dimension mismatch: {dims}")
    return next(iter(dims.values()))


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def is_density(M: np.ndarray) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.all(np.isfinite(M)):
        return False
    fro = np.linalg.norm(M)
    if np.linalg.norm(M - dagger(M)) > HERMITIAN_TOL * max(1.0, fro):
        return False
    herm = 0.5 * (M + dagger(M))
    if np.linalg.eigvalsh(herm).min() < -HERMITIAN_TOL:
        return False
    return abs(np.trace(M) - 1.0) <= TRACE_TOL


def unitarity_residual(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.linalg.norm(dagger(U) @ U - np.eye(U.shape[1])))


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and unitarity_residual(U) <= tol


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The columns are rephased by the phases of diag(R) so the law is invariant
    under left multiplication by a fixed unitary.
    """
    if dim < 1:
        raise InvalidDimension(f"dim must be >= 1, got {dim}")
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """W diag(d) W^dagger with W Haar and d uniform on the probability simplex."""
    if dim < 1:
        raise InvalidDimension(f"dim must be >= 1, got {dim}")
    W = haar_unitary(dim, rng)
    d = rng.dirichlet(np.ones(dim))
    rho = (W * d) @ dagger(W)
    return 0.5 * (rho + dagger(rho))


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def projector(U: np.ndarray, i: int) -> np.ndarray:
    u = U[:, i]
    return np.outer(u, u.conj())


def _outcome_probs(U: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # p_i = u_i^dagger rho u_i for every column at once
    return np.einsum("ji,ji->i", U.conj(), rho @ U).real


@dataclass(frozen=True)
class OutcomeDistribution:
    probabilities: np.ndarray
    measurement: np.ndarray


def outcome_distribution(U: np.ndarray, rho: np.ndarray) -> OutcomeDistribution:
    _same_dim((U, "U"), (rho, "rho"))
    return OutcomeDistribution(_outcome_probs(U, rho), U)


def objective(U: np.ndarray, rho: np.ndarray, tau: np.ndarray) -> float:
    """sum_i tr(tau P_i rho P_i) = sum_i tr(P_i rho) tr(P_i tau)."""
    _same_dim((U, "U"), (rho, "rho"), (tau, "tau"))
    return float(_outcome_probs(U, rho) @ _outcome_probs(U, tau))


def apply_pm(U: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Post-measurement state sum_i P_i rho P_i."""
    _same_dim((U, "U"), (rho, "rho"))
    return (U * _outcome_probs(U, rho)) @ dagger(U)


def weighted_objective(q: np.ndarray, L: np.ndarray, rho: np.ndarray, tau: np.ndarray) -> float:
    """tr(rho Q_L[tau]) where Q_L[tau] = L Q[L^dagger tau L] L^dagger.

    With rank-one Q_i = |q_i><q_i| every term factorises through w_i = L q_i.
    """
    _same_dim((q, "q"), (L, "L"), (rho, "rho"), (tau, "tau"))
    W = L @ q
    return float(_outcome_probs(W, rho) @ _outcome_probs(W, tau))


def biweighted_objective(q, L, B, rho, tau) -> float:
    """sum_i tr(rho L Q_i L^dagger) tr(tau B Q_i B^dagger)."""
    _same_dim((q, "q"), (L, "L"), (B, "B"), (rho, "rho"), (tau, "tau"))
    return float(_outcome_probs(L @ q, rho) @ _outcome_probs(B @ q, tau))


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def stationarity_residual(U: np.ndarray, rho: np.ndarray, tau: np.ndarray) -> float:
    """Frobenius norm of [rho, P[tau]] - [P[rho], tau]; zero at critical points."""
    _same_dim((U, "U"), (rho, "rho"), (tau, "tau"))
    Ptau = apply_pm(U, tau)
    Prho = apply_pm(U, rho)
    return float(np.linalg.norm(commutator(rho, Ptau) - commutator(Prho, tau)))


@dataclass(frozen=True)
class Subspace:
    """An r-dimensional subspace of C^n given by an n x r isometry."""

    ambient_dim: int
    sub_dim: int
    isometry: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.isometry)
        if V.shape != (self.ambient_dim, self.sub_dim):
            raise ShapeError(f"isometry must be {self.ambient_dim}x{self.sub_dim}, got {V.shape}")
        if self.sub_dim < 1 or self.sub_dim > self.ambient_dim:
            raise InvalidDimension(f"need 1 <= r <= n, got r={self.sub_dim}, n={self.ambient_dim}")
        if np.linalg.norm(dagger(V) @ V - np.eye(self.sub_dim)) > 1e-10:
            raise ShapeError("isometry columns are not orthonormal")

    @classmethod
    def canonical(cls, n: int, r: int) -> "Subspace":
        return cls(n, r, np.eye(n, r, dtype=complex))

    @property
    def projector(self) -> np.ndarray:
        return self.isometry @ dagger(self.isometry)

    def complement(self) -> np.ndarray:
        """An n x (n - r) isometry onto the orthogonal complement."""
        n, r = self.ambient_dim, self.sub_dim
        V = np.asarray(self.isometry, dtype=complex)
        if np.array_equal(V, np.eye(n, r)):
            return np.eye(n, dtype=complex)[:, r:]
        # left singular vectors beyond rank r span the complement
        Wfull, _, _ = np.linalg.svd(V, full_matrices=True)
        return Wfull[:, r:]

    def embed_state(self, rho: np.ndarray) -> np.ndarray:
        if _square(rho, "rho") != self.sub_dim:
            raise ShapeError(f"state must be {self.sub_dim}x{self.sub_dim}")
        V = self.isometry
        return V @ rho @ dagger(V)


def embed_pm(q: np.ndarray, s: Subspace, complement: np.ndarray | None = None) -> np.ndarray:
    """Complete a measurement on the subspace with a fixed one on its complement.

    Returns the n x n unitary [V q | V_perp c]; the first r outcomes are the
    embedded subspace outcomes.
    """
    r, n = s.sub_dim, s.ambient_dim
    if _square(q, "q") != r:
        raise ShapeError(f"q must be {r}x{r}, got {q.shape}")
    if complement is None:
        complement = np.eye(n - r, dtype=complex)
    if n - r and _square(complement, "complement") != n - r:
        raise ShapeError(f"complement must be {n - r}x{n - r}, got {np.shape(complement)}")
    left = s.isometry @ q
    if n == r:
        return left
    return np.hstack([left, s.complement() @ complement])
