"""Riemannian gradient ascent over U(n) and the suboptimality-ratio estimator.

The ascent maximises S(U) = tr(rho E(U)[tau]) where E(U) measures in the
columns of U.  Each step moves along the skew-Hermitian gradient G and maps
back to the group with the polar factor of U + beta G U.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRetraction, InvalidDimension, ConfigError, ShapeError
from .quantum import _same_dim, haar_unitary, random_density
from .rng import make_rng


@dataclass(frozen=True)
class OptConfig:
    t_max: int = 10_000
    step: float = 1e-2
    restarts: int = 5
    seed: int = 0
    grad_tol: float = 0.0
    # restarts used for the full-space (numerator) search in estimate_K
    restarts_num: int = 3

    def __post_init__(self):
        if self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1, got {self.t_max}")
        if not self.step > 0:
            raise ConfigError(f"step must be > 0, got {self.step}")
        if self.restarts < 1 or self.restarts_num < 1:
            raise ConfigError("restarts must be >= 1")
        if self.grad_tol < 0:
            raise ConfigError("grad_tol must be >= 0")


@dataclass(frozen=True)
class OptTrace:
    values: np.ndarray
    best_value: float
    best_unitary: np.ndarray
    best_iter: int
    final_grad_norm: float


@dataclass(frozen=True)
class KEstimate:
    numerator: float
    denominator: float
    ratio: float
    n: int
    r: int
    seeds: dict
    numerator_runs: tuple = field(default=(), repr=False)
    denominator_runs: tuple = field(default=(), repr=False)
    rho: np.ndarray | None = field(default=None, repr=False)
    tau: np.ndarray | None = field(default=None, repr=False)


def _probs(U, rho):
    return (U.conj() * (rho @ U)).sum(axis=0).real


def _value_and_gradient(U, rho, tau):
    a = _probs(U, rho)
    b = _probs(U, tau)
    Uh = U.conj().T
    Ptau = (U * b) @ Uh
    Prho = (U * a) @ Uh
    X = rho @ Ptau + tau @ Prho
    return float(a @ b), X - X.conj().T


def riemannian_gradient(U: np.ndarray, rho: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Skew-Hermitian gradient of S at U.

    G = sum_i rho P_i tau P_i - P_i tau P_i rho + tau P_i rho P_i - P_i rho P_i tau.
    With this normalisation dS(exp(hA) U)/dh at h = 0 equals Re tr(G^dagger A)
    for every skew-Hermitian A, so the scale factor is exactly 1.
    """
    _same_dim((U, "U"), (rho, "rho"), (tau, "tau"))
    return _value_and_gradient(U, rho, tau)[1]


def polar_unitary(M: np.ndarray) -> np.ndarray:
    W, s, Vh = np.linalg.svd(M)
    if not np.any(s > 0):
        raise DegenerateRetraction("polar factor undefined: all singular values vanish")
    return W @ Vh


def retract(U: np.ndarray, direction: np.ndarray, step: float) -> np.ndarray:
    """Polar projection of U + step * direction @ U back onto U(n)."""
    if U.shape != direction.shape:
        raise ShapeError(f"U {U.shape} and direction {direction.shape} differ")
    if step == 0:
        return U
    return polar_unitary(U + step * (direction @ U))


def ascend(rho: np.ndarray, tau: np.ndarray, U0: np.ndarray, cfg: OptConfig) -> OptTrace:
    """Projected gradient ascent from U0 for at most cfg.t_max steps."""
    _same_dim((U0, "U0"), (rho, "rho"), (tau, "tau"))
    rho = np.ascontiguousarray(rho, dtype=complex)
    tau = np.ascontiguousarray(tau, dtype=complex)
    U = np.array(U0, dtype=complex)
    beta = cfg.step
    values = np.empty(cfg.t_max + 1)
    best_value, best_iter, best_U = -np.inf, 0, U
    gnorm = np.inf
    t = 0
    while True:
        value, G = _value_and_gradient(U, rho, tau)
        values[t] = value
        if value > best_value:
            best_value, best_iter, best_U = value, t, U
        gnorm = float(np.linalg.norm(G))
        if t == cfg.t_max or gnorm < cfg.grad_tol:
            break
        W, s, Vh = np.linalg.svd(U + beta * (G @ U))
        if not s[0] > 0:
            raise DegenerateRetraction("polar factor undefined: all singular values vanish")
        U = W @ Vh
        t += 1
    return OptTrace(values[: t + 1], float(best_value), best_U, best_iter, gnorm)


def subspace_initial(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Haar on the first r coordinates, identity on the rest."""
    U0 = np.eye(n, dtype=complex)
    U0[:r, :r] = haar_unitary(r, rng)
    return U0


def estimate_K(n: int, r: int, cfg: OptConfig, rng: np.random.Generator | None = None,
               rho: np.ndarray | None = None, tau: np.ndarray | None = None,
               key: tuple = (), numerator_init: str = "aligned") -> KEstimate:
    """Empirical suboptimality ratio best_{U(n)} S / best_{U(r)} S.

    States are drawn on the canonical r-dimensional subspace from ``rng``
    (default: stream (cfg.seed, 0, *key)) unless given as r x r matrices.
    Restart j of either search draws its initial r x r unitary from the
    stream (cfg.seed, 1, *key, j).  With ``numerator_init="aligned"`` the
    numerator embeds that block with the identity on the complement, so for
    n == r both searches coincide.  ``"haar"`` starts the numerator from a
    Haar unitary on all of C^n instead (stream (cfg.seed, 3, *key, j)).

    Note that an aligned start never leaves the aligned measurements: the
    gradient of a block-diagonal U is block-diagonal when rho and tau live
    on the subspace.
    """
    if r < 2 or n < r:
        raise InvalidDimension(f"need 2 <= r <= n, got r={r}, n={n}")
    if numerator_init not in ("aligned", "haar"):
        raise ConfigError(f"unknown numerator_init {numerator_init!r}")
    if rho is None or tau is None:
        state_rng = rng if rng is not None else make_rng(cfg.seed, 0, *key)
        rho = random_density(r, state_rng)
        tau = random_density(r, state_rng)
    rho_full = np.zeros((n, n), dtype=complex)
    tau_full = np.zeros((n, n), dtype=complex)
    rho_full[:r, :r] = rho
    tau_full[:r, :r] = tau

    den_runs = []
    for j in range(cfg.restarts):
        V0 = haar_unitary(r, make_rng(cfg.seed, 1, *key, j))
        den_runs.append(ascend(rho, tau, V0, cfg))
    num_runs = []
    for j in range(cfg.restarts_num):
        if numerator_init == "aligned":
            U0 = subspace_initial(n, r, make_rng(cfg.seed, 1, *key, j))
        else:
            U0 = haar_unitary(n, make_rng(cfg.seed, 3, *key, j))
        num_runs.append(ascend(rho_full, tau_full, U0, cfg))
    num = max(t.best_value for t in num_runs)
    den = max(t.best_value for t in den_runs)
    return KEstimate(
        numerator=num, denominator=den, ratio=num / den, n=n, r=r,
        seeds={"seed": cfg.seed, "key": list(key), "state_stream": [0, *key],
               "init_stream": [1, *key], "numerator_init": numerator_init},
        numerator_runs=tuple(num_runs), denominator_runs=tuple(den_runs),
        rho=rho, tau=tau,
    )

