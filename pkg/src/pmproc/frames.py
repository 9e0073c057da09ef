"""Parseval frames induced by a full-space measurement and their equipartitions.

Projecting the n outcome vectors of a measurement on C^n onto an r-dimensional
subspace gives a Parseval frame {v_i}.  Grouping the (zero-padded) frame into
T = ceil(n / r) blocks of r vectors, after a permutation and per-vector phases,
yields weight matrices L_t with sum_t L_t L_t^dagger = I.  The quantity of
interest is the operator norm of the variance matrix sum_t L_t^dagger L_t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidPermutation, ShapeError
from .quantum import Subspace, _outcome_probs, _square, objective

FRAME_TOL = 1e-8


@dataclass(frozen=True)
class ParsevalFrame:
    r: int
    m: int
    # r x m matrix whose columns are the frame vectors
    vectors: np.ndarray

    @property
    def T(self) -> int:
        return self.m // self.r

    def frame_operator(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T

    def norms_squared(self) -> np.ndarray:
        return np.sum(np.abs(self.vectors) ** 2, axis=0)

    def is_parseval(self, tol: float = FRAME_TOL) -> bool:
        return bool(np.linalg.norm(self.frame_operator() - np.eye(self.r)) <= tol)


@dataclass(frozen=True)
class WeightList:
    T: int
    weights: np.ndarray  # shape (T, r, r)
    perm: np.ndarray
    phases: np.ndarray

    @property
    def r(self) -> int:
        return self.weights.shape[1]

    def partition_of_unity_residual(self) -> float:
        S = np.einsum("tij,tkj->ik", self.weights, self.weights.conj())
        return float(np.linalg.norm(S - np.eye(self.r)))


@dataclass(frozen=True)
class PartitionSearchResult:
    best_perm: np.ndarray
    best_phases: np.ndarray
    best_opnorm: float
    initial_opnorm: float
    samples_tried: int
    best_index: int


def canonical_frame(r: int, T: int = 1) -> ParsevalFrame:
    """e_1, ..., e_r followed by (T - 1) r null vectors."""
    V = np.zeros((r, T * r), dtype=complex)
    V[:, :r] = np.eye(r)
    return ParsevalFrame(r, T * r, V)


def frame_from_vectors(vectors: np.ndarray, r: int | None = None) -> ParsevalFrame:
    """Wrap an r x k matrix of frame vectors, padding with zeros to a multiple of r."""
    V = np.asarray(vectors, dtype=complex)
    r = V.shape[0] if r is None else r
    k = V.shape[1]
    m = math.ceil(k / r) * r
    if m > k:
        V = np.hstack([V, np.zeros((r, m - k), dtype=complex)])
    return ParsevalFrame(r, m, V)


def project_frame(pm: np.ndarray, s: Subspace) -> ParsevalFrame:
    """v_i = coordinates in the subspace of the projection of column i of pm."""
    n = _square(pm, "pm")
    if n != s.ambient_dim:
        raise ShapeError(f"measurement has dim {n}, subspace lives in dim {s.ambient_dim}")
    return frame_from_vectors(s.isometry.conj().T @ pm, s.sub_dim)


def _check_perm(perm: np.ndarray, m: int) -> np.ndarray:
    perm = np.asarray(perm)
    if perm.shape != (m,) or not np.issubdtype(perm.dtype, np.integer):
        raise InvalidPermutation(f"permutation must be {m} integers")
    if not np.array_equal(np.sort(perm), np.arange(m)):
        raise InvalidPermutation("permutation is not a bijection of range(m)")
    return perm


def _blocks(frame: ParsevalFrame, perm: np.ndarray, phases: np.ndarray) -> np.ndarray:
    # slot j holds e^{i theta_{perm[j]}} v_{perm[j]}; block t is slots r t .. r t + r - 1
    W = frame.vectors[:, perm] * np.exp(1j * phases[perm])
    return W.reshape(frame.r, frame.T, frame.r).transpose(1, 0, 2)


def build_weights(frame: ParsevalFrame, perm=None, phases=None) -> WeightList:
    """L_t = sum_l e^{i theta_{pi(r t + l)}} |v_{pi(r t + l)}><e_l| (0-based t, l)."""
    m = frame.m
    perm = np.arange(m) if perm is None else _check_perm(perm, m)
    phases = np.zeros(m) if phases is None else np.asarray(phases, dtype=float)
    if phases.shape != (m,):
        raise ShapeError(f"phases must have length {m}")
    return WeightList(frame.T, _blocks(frame, perm, phases), perm, phases)


def decomposition_residual(pm: np.ndarray, s: Subspace, wl: WeightList,
                           rho: np.ndarray, tau: np.ndarray) -> float:
    """Relative gap between tr(rho P[tau]) on C^n and sum_t tr(rho E_{L_t}[tau]) on S.

    ``rho`` and ``tau`` may be given on the subspace (r x r) or already
    embedded (n x n); E is the canonical measurement of the subspace.
    """
    r, n = s.sub_dim, s.ambient_dim
    V = s.isometry
    if rho.shape == (n, n) and n != r:
        rho_s, tau_s = V.conj().T @ rho @ V, V.conj().T @ tau @ V
        rho_n, tau_n = rho, tau
    elif rho.shape == (r, r):
        rho_s, tau_s = rho, tau
        rho_n, tau_n = s.embed_state(rho), s.embed_state(tau)
    else:
        raise ShapeError(f"states must be {r}x{r} or {n}x{n}, got {rho.shape}")
    if wl.r != r:
        raise ShapeError("weight list does not live on the subspace")
    lhs = objective(pm, rho_n, tau_n)
    # E canonical: the outcome vectors of E_{L_t} are the columns of L_t
    rhs = sum(float(_outcome_probs(L, rho_s) @ _outcome_probs(L, tau_s)) for L in wl.weights)
    return abs(lhs - rhs) / max(lhs, 1e-15)


def variance_matrix(wl: WeightList) -> np.ndarray:
    """sum_t L_t^dagger L_t."""
    return np.einsum("tji,tjk->ik", wl.weights.conj(), wl.weights)


def _power_opnorm(M: np.ndarray, iters: int = 500, tol: float = 1e-13) -> float:
    A = M.conj().T @ M
    x = np.ones(A.shape[0], dtype=complex) / math.sqrt(A.shape[0])
    lam = 0.0
    for _ in range(iters):
        y = A @ x
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
        if abs(nrm - lam) <= tol * nrm:
            lam = nrm
            break
        lam = nrm
    return math.sqrt(lam)


def operator_norm(M: np.ndarray) -> float:
    """Largest singular value (dense SVD up to 64 x 64, power iteration beyond)."""
    M = np.asarray(M)
    if max(M.shape) <= 64:
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
    return _power_opnorm(M)


def _variance_opnorms(frame: ParsevalFrame, perms: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Operator norms of the variance matrix for a batch of (perm, phases)."""
    r, T = frame.r, frame.T
    W = np.take(frame.vectors, perms, axis=1)  # r x B x m
    W = W * np.exp(1j * np.take_along_axis(phases, perms, axis=1))[None]
    W = W.reshape(r, perms.shape[0], T, r)
    Lmat = np.einsum("cbti,cbtj->bij", W.conj(), W)
    return np.linalg.eigvalsh(Lmat)[:, -1]


def search_partition(frame: ParsevalFrame, budget: int, rng: np.random.Generator,
                     batch: int = 256) -> PartitionSearchResult:
    """Randomised search for an equipartition with small variance norm.

    Candidate 0 is the identity permutation with zero phases; the remaining
    budget - 1 candidates are uniform permutations with uniform phases, drawn
    sequentially from ``rng`` so a larger budget extends a smaller one.
    """
    if budget < 1:
        raise DomainError("budget must be >= 1")
    m = frame.m
    ident = np.arange(m)
    zero = np.zeros(m)
    initial = operator_norm(variance_matrix(build_weights(frame, ident, zero)))
    best = (initial, ident, zero, 0)
    done = 1
    while done < budget:
        b = min(batch, budget - done)
        # one (perm, phases) pair at a time keeps the stream independent of batching
        draws = [(rng.permutation(m), rng.uniform(0.0, 2.0 * np.pi, size=m)) for _ in range(b)]
        perms = np.stack([d[0] for d in draws])
        phases = np.stack([d[1] for d in draws])
        norms = _variance_opnorms(frame, perms, phases)
        j = int(np.argmin(norms))
        if norms[j] < best[0]:
            best = (float(norms[j]), perms[j], phases[j], done + j)
        done += b
    return PartitionSearchResult(best[1], best[2], float(best[0]), float(initial), budget, best[3])


def sample_trace_powers(frame: ParsevalFrame, k: int, samples: int,
                        rng: np.random.Generator, batch: int = 1024) -> np.ndarray:
    """tr(L^k) of the variance matrix for ``samples`` uniform (perm, phases)."""
    r, T, m = frame.r, frame.T, frame.m
    out = np.empty(samples)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        perms = np.stack([rng.permutation(m) for _ in range(b)])
        phases = rng.uniform(0.0, 2.0 * np.pi, size=(b, m))
        W = np.take(frame.vectors, perms, axis=1)
        W = W * np.exp(1j * np.take_along_axis(phases, perms, axis=1))[None]
        W = W.reshape(r, b, T, r)
        Lmat = np.einsum("cbti,cbtj->bij", W.conj(), W)
        out[done:done + b] = np.trace(np.linalg.matrix_power(Lmat, k), axis1=1, axis2=2).real
        done += b
    return out


def estimate_Fk(frame: ParsevalFrame, k: int, samples: int,
                rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of E tr(L^k) over uniform (perm, phases)."""
    if k < 1 or samples < 1:
        raise DomainError("need k >= 1 and samples >= 1")
    vals = sample_trace_powers(frame, k, samples, rng)
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return float(vals.mean()), stderr


def moment_bound_reference(r: int, k: int, T: int) -> float:
    """r k^k + k! k^(2k) r^k / T, the moment bracket without its constant."""
    if r < 2 or T < 2 or not 1 <= k <= r:
        raise DomainError(f"need r >= 2, T >= 2, 1 <= k <= r; got r={r}, k={k}, T={T}")
    return r * k**k + math.factorial(k) * k ** (2 * k) * r**k / T
