"""Seeded sweeps of the ratio estimator, verification campaigns and frame dumps.

Everything written here is a deterministic function of the configuration and
seeds: tasks own their generator streams and results are sorted before
writing, so the worker count never changes the output bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ResultsIOError, UnknownSelector
from .frames import (build_weights, canonical_frame, decomposition_residual, estimate_Fk,
                     moment_bound_reference, operator_norm, project_frame, search_partition,
                     variance_matrix)
from .inequalities import (SeparableOperator, cauchy_integral_representation, interpolation_bound,
                           lieb_convexity, quadrature_inequality)
from .manifold import OptConfig, estimate_K
from .quantum import Subspace, haar_unitary, random_density, stationarity_residual
from .randomization import (biweighted_expectation, biweighted_mc, check_Lhat_moments,
                            empirical_tail, verify_factor3)
from .rng import NORMAL_SAMPLER, RNG_ALGORITHM, make_rng

CSV_HEADER = ("r,n,seed,restart,numerator,denominator,k_hat,best_iter_num,best_iter_den,"
              "resid_num,resid_den,wall_ms")
SELECTORS = ("frames", "randomization", "inequalities", "all")


@dataclass(frozen=True)
class SweepConfig:
    r_values: tuple
    n_offsets: tuple
    seeds: tuple
    opt: OptConfig = field(default_factory=OptConfig)
    output_dir: str = "."
    workers: int = 1
    numerator_init: str = "aligned"
    timing: bool = False

    def __post_init__(self):
        if not self.r_values or not self.n_offsets or not self.seeds:
            raise ConfigError("r_values, n_offsets and seeds must be non-empty")
        if any(r < 2 for r in self.r_values):
            raise ConfigError("all r must be >= 2")
        if any(o < 0 for o in self.n_offsets):
            raise ConfigError("n offsets must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def tasks(self):
        return [(r, r + off, s) for r in self.r_values for off in self.n_offsets for s in self.seeds]


@dataclass(frozen=True)
class ResultRow:
    r: int
    n: int
    seed: int
    restart_index: int
    numerator: float
    denominator: float
    k_hat: float
    best_iter_num: int
    best_iter_den: int
    stationarity_residual_num: float
    stationarity_residual_den: float
    wall_time_ms: float


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _running_best(runs, j):
    upto = runs[: min(j, len(runs) - 1) + 1]
    return max(upto, key=lambda t: t.best_value)


def _sweep_task(args):
    r, n, seed, opt, numerator_init, timing = args
    start = time.perf_counter()
    cfg = OptConfig(**{**asdict(opt), "seed": seed})
    est = estimate_K(n, r, cfg, key=(r, n), numerator_init=numerator_init)
    wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
    rho_n = np.zeros((n, n), dtype=complex)
    tau_n = np.zeros((n, n), dtype=complex)
    rho_n[:r, :r] = est.rho
    tau_n[:r, :r] = est.tau
    rows = []
    # row j reports the best of the first j + 1 restarts on each side
    for j in range(max(len(est.numerator_runs), len(est.denominator_runs))):
        num = _running_best(est.numerator_runs, j)
        den = _running_best(est.denominator_runs, j)
        rows.append(ResultRow(
            r, n, seed, j, num.best_value, den.best_value, num.best_value / den.best_value,
            num.best_iter, den.best_iter,
            stationarity_residual(num.best_unitary, rho_n, tau_n),
            stationarity_residual(den.best_unitary, est.rho, est.tau),
            wall,
        ))
    raw = {
        "r": r, "n": n, "seed": seed,
        "numerator_restarts": [t.best_value for t in est.numerator_runs],
        "denominator_restarts": [t.best_value for t in est.denominator_runs],
        "k_hat": est.ratio,
    }
    return rows, raw


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in asdict(row).values()) + "\n")
    return buf.getvalue()


def _require_dir(path: Path):
    if not path.is_dir():
        raise ResultsIOError(f"output directory does not exist: {path}")


def sweep_rows(cfg: SweepConfig):
    jobs = [(r, n, s, cfg.opt, cfg.numerator_init, cfg.timing) for r, n, s in cfg.tasks()]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_task, jobs))
    else:
        results = [_sweep_task(j) for j in jobs]
    rows = sorted((row for rs, _ in results for row in rs),
                  key=lambda w: (w.r, w.n, w.seed, w.restart_index))
    raws = sorted((raw for _, raw in results), key=lambda w: (w["r"], w["n"], w["seed"]))
    return rows, raws


def run_sweep(cfg: SweepConfig, stem: str = "results") -> Path:
    """Run every (r, n, seed) task and write ``<stem>.csv`` plus ``<stem>.json``."""
    out = Path(cfg.output_dir)
    _require_dir(out)
    rows, raws = sweep_rows(cfg)
    csv_path = out / f"{stem}.csv"
    try:
        csv_path.write_text(rows_to_csv(rows))
        sidecar = {
            "config": {
                "r_values": list(cfg.r_values), "n_offsets": list(cfg.n_offsets),
                "seeds": list(cfg.seeds),
                # the per-task seed replaces opt.seed
                "opt": {k: v for k, v in asdict(cfg.opt).items() if k != "seed"},
                "numerator_init": cfg.numerator_init,
            },
            "code_version": __version__,
            "rng_algorithm": RNG_ALGORITHM,
            "normal_sampler": NORMAL_SAMPLER,
            "csv": csv_path.name,
            "runs": raws,
        }
        (out / f"{stem}.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ResultsIOError(f"cannot write results to {out}: {exc}") from exc
    return csv_path


def read_results(path) -> list[dict]:
    """Parse a results CSV, checking the header and every field."""
    from .errors import ParseError

    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ResultsIOError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError(f"{path}: header does not match the results schema")
    names = CSV_HEADER.split(",")
    ints = {"r", "n", "seed", "restart", "best_iter_num", "best_iter_den"}
    rows = []
    for lineno, rec in enumerate(csv.reader(lines[1:]), start=2):
        if len(rec) != len(names):
            raise ParseError(f"{path}:{lineno}: expected {len(names)} fields, got {len(rec)}")
        try:
            rows.append({k: int(v) if k in ints else float(v) for k, v in zip(names, rec)})
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return rows


def final_estimates(rows) -> dict:
    """k_hat of the last restart row for every (r, n, seed)."""
    last = {}
    for row in rows:
        key = (row["r"], row["n"], row["seed"])
        if key not in last or row["restart"] > last[key]["restart"]:
            last[key] = row
    return {k: v["k_hat"] for k, v in last.items()}


def median_k_hat(rows) -> dict:
    """Median over seeds of the final k_hat, keyed by (r, n)."""
    groups: dict = {}
    for (r, n, _), k in final_estimates(rows).items():
        groups.setdefault((r, n), []).append(k)
    return {key: float(np.median(v)) for key, v in sorted(groups.items())}


# ---------------------------------------------------------------- verification

@dataclass
class CheckResult:
    name: str
    instances: int = 0
    failures: int = 0
    worst_slack: float = math.inf
    details: dict = field(default_factory=dict)

    def record(self, passed: bool, slack: float):
        self.instances += 1
        self.failures += 0 if passed else 1
        self.worst_slack = min(self.worst_slack, float(slack))

    def as_dict(self):
        d = asdict(self)
        if not math.isfinite(d["worst_slack"]):
            d["worst_slack"] = None
        return d


def _random_psd(r, rng, rank=None):
    k = r if rank is None else rank
    G = rng.standard_normal((r, k)) + 1j * rng.standard_normal((r, k))
    return G @ G.conj().T


def _ginibre(r, rng, scale=1.0):
    return scale * (rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))) / math.sqrt(2)


def frames_checks(seed: int, instances: int = 100, rerandomize: int = 20,
                  search_budget: int = 200) -> list[CheckResult]:
    rng = make_rng(seed, 10)
    decomp = CheckResult("decomposition_identity")
    unity = CheckResult("partition_of_unity")
    trace = CheckResult("variance_trace_equals_r")
    for _ in range(instances):
        r = int(rng.integers(2, 7))
        n = int(rng.integers(r, 25))
        s = Subspace.canonical(n, r)
        U = haar_unitary(n, rng)
        rho, tau = random_density(r, rng), random_density(r, rng)
        frame = project_frame(U, s)
        choices = [(None, None)] + [
            (rng.permutation(frame.m), rng.uniform(0, 2 * np.pi, frame.m)) for _ in range(rerandomize)
        ]
        for perm, phases in choices:
            wl = build_weights(frame, perm, phases)
            res = decomposition_residual(U, s, wl, rho, tau)
            decomp.record(res <= 1e-8, 1e-8 - res)
            pu = wl.partition_of_unity_residual()
            unity.record(pu <= 1e-8, 1e-8 - pu)
            dev = abs(np.trace(variance_matrix(wl)).real - r)
            trace.record(dev <= 1e-8, 1e-8 - dev)

    fk1 = CheckResult("Fk_k1_equals_r")
    for r, T in [(2, 2), (3, 4), (4, 8), (6, 3)]:
        frame = project_frame(haar_unitary(r * T, rng), Subspace.canonical(r * T, r))
        mean, se = estimate_Fk(frame, 1, 500, rng)
        dev = abs(mean - r)
        fk1.record(dev <= 1e-10 and se <= 1e-12, 1e-10 - dev)
        fk1.details[f"r={r},T={T}"] = {"mean": mean, "stderr": se}

    search = CheckResult("search_non_regression")
    for r in (2, 4, 8):
        frame = project_frame(haar_unitary(32 * r, rng), Subspace.canonical(32 * r, r))
        res = search_partition(frame, search_budget, rng)
        search.record(res.best_opnorm <= res.initial_opnorm, res.initial_opnorm - res.best_opnorm)
        search.details[f"r={r}"] = {"best_opnorm": res.best_opnorm, "initial_opnorm": res.initial_opnorm,
                                    "log_r": math.log(r)}
    return [decomp, unity, trace, fk1, search]


def randomization_checks(seed: int, frames: int = 50, samples: int = 10_000,
                         tail_lists: int = 20, levels: int = 10, moment_lists: int = 20,
                         moment_samples: int = 100_000) -> list[CheckResult]:
    rng = make_rng(seed, 20)
    f3 = CheckResult("factor3_randomization")
    shapes = [(8, 2), (12, 3), (16, 4)]
    for i in range(frames):
        n, r = shapes[i % len(shapes)]
        frame = project_frame(haar_unitary(n, rng), Subspace.canonical(n, r))
        wl = build_weights(frame, rng.permutation(frame.m), rng.uniform(0, 2 * np.pi, frame.m))
        q = haar_unitary(r, rng)
        rep = verify_factor3(wl, q, random_density(r, rng), random_density(r, rng), samples, rng)
        f3.record(rep.passed, 3 * (rep.rhs_mean + 3 * rep.rhs_stderr) - rep.lhs)

    canon = CheckResult("factor3_canonical_ratio_9")
    wl = build_weights(canonical_frame(3, 1))
    rho, tau, q = random_density(3, rng), random_density(3, rng), haar_unitary(3, rng)
    rep = verify_factor3(wl, q, rho, tau, samples, rng)
    ratio, ratio_se = 3 * rep.rhs_mean / rep.lhs, 3 * rep.rhs_stderr / rep.lhs
    canon.record(abs(ratio - 9.0) <= 3 * ratio_se, 3 * ratio_se - abs(ratio - 9.0))
    canon.details = {"ratio": ratio, "stderr": ratio_se}

    tail = CheckResult("gaussian_series_tail")
    grid = np.linspace(0.5, 5.0, levels)
    for i in range(tail_lists):
        r = (2, 3, 4, 6)[i % 4]
        n = r * int(rng.integers(2, 9))
        frame = project_frame(haar_unitary(n, rng), Subspace.canonical(n, r))
        wl = build_weights(frame, rng.permutation(frame.m), rng.uniform(0, 2 * np.pi, frame.m))
        rep = empirical_tail(wl, grid, samples, rng)
        tail.instances += len(grid)
        tail.failures += rep.violations
        tail.worst_slack = min(tail.worst_slack, float(np.min(rep.bound - rep.empirical_tail)))

    moments = CheckResult("Lhat_first_second_moments")
    for i in range(moment_lists):
        r = (2, 3, 4)[i % 3]
        n = r * int(rng.integers(2, 9))
        frame = project_frame(haar_unitary(n, rng), Subspace.canonical(n, r))
        wl = build_weights(frame, rng.permutation(frame.m), rng.uniform(0, 2 * np.pi, frame.m))
        chk = check_Lhat_moments(wl, moment_samples, rng)
        moments.record(chk.passed, chk.threshold - chk.max_z)

    bi = CheckResult("biweighted_symmetrisation_identity")
    for _ in range(5):
        frame = project_frame(haar_unitary(8, rng), Subspace.canonical(8, 2))
        wl = build_weights(frame)
        q, rho, tau = haar_unitary(2, rng), random_density(2, rng), random_density(2, rng)
        exact = biweighted_expectation(wl, q, rho, tau)
        mean, se = biweighted_mc(wl, q, rho, tau, samples, rng)
        bi.record(abs(mean - exact) <= 3 * se, 3 * se - abs(mean - exact))
    return [f3, canon, tail, moments, bi]


def inequality_checks(seed: int, instances: int = 1000, interp_instances: int = 100,
                      cauchy_samples: int = 1_000_000, opt: OptConfig | None = None) -> list[CheckResult]:
    rng = make_rng(seed, 30)
    lieb = CheckResult("lieb_convexity")
    quad = CheckResult("quadrature_inequality")
    for i in range(instances):
        r = (2, 3, 4)[i % 3]
        A, B = _random_psd(r, rng), _random_psd(r, rng)
        v = lieb_convexity(A, B, _ginibre(r, rng), _ginibre(r, rng), float(rng.random()))
        lieb.record(v.passed, v.slack)
        r = (2, 3)[i % 2]
        C = SeparableOperator(tuple((float(rng.random()), _random_psd(r, rng), _random_psd(r, rng))
                                    for _ in range(int(rng.integers(1, 4)))))
        D = SeparableOperator(tuple((float(rng.random()), _random_psd(r, rng), _random_psd(r, rng))
                                    for _ in range(int(rng.integers(1, 4)))))
        v = quadrature_inequality(C, D, _ginibre(r, rng), _ginibre(r, rng))
        quad.record(v.passed, v.slack)

    interp = CheckResult("interpolation_bound")
    opt = opt or OptConfig(t_max=2000, step=5e-2, restarts=20, grad_tol=1e-9, seed=seed)
    for _ in range(interp_instances):
        r = 3
        L = _ginibre(r, rng)
        L *= 2.0 * rng.random() / operator_norm(L)
        v = interpolation_bound(L, haar_unitary(r, rng), random_density(r, rng),
                                random_density(r, rng), opt)
        interp.record(v.passed, v.slack)

    cauchy = CheckResult("cauchy_integral_representation")
    for K in (np.diag([1.0, 0.5]), np.diag([1.0, -0.5])):
        A = _ginibre(2, rng)
        res = cauchy_integral_representation(K, A, cauchy_samples, rng)
        cauchy.record(res <= 1e-2, 1e-2 - res)
        cauchy.details[str(np.diag(K).tolist())] = res
    return [lieb, quad, interp, cauchy]


def run_verify(suite: str, seed: int, output, **sizes) -> tuple[Path, int]:
    """Run a verification suite, write its JSON report, return (path, exit status)."""
    if suite not in SELECTORS:
        raise UnknownSelector(f"unknown suite {suite!r}; choose from {', '.join(SELECTORS)}")
    output = Path(output)
    _require_dir(output.parent if output.parent != Path("") else Path("."))
    checks = []
    if suite in ("frames", "all"):
        checks += frames_checks(seed, **sizes.get("frames", {}))
    if suite in ("randomization", "all"):
        checks += randomization_checks(seed, **sizes.get("randomization", {}))
    if suite in ("inequalities", "all"):
        checks += inequality_checks(seed, **sizes.get("inequalities", {}))
    failures = sum(c.failures for c in checks)
    report = {
        "suite": suite, "seed": seed, "code_version": __version__,
        "rng_algorithm": RNG_ALGORITHM, "failures": failures,
        "checks": [c.as_dict() for c in checks],
    }
    try:
        output.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ResultsIOError(f"cannot write report {output}: {exc}") from exc
    return output, 1 if failures else 0


# ------------------------------------------------------------------ decompose

def _cjson(M):
    M = np.asarray(M)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def decompose(n: int, r: int, seed: int, budget: int = 1000) -> dict:
    """Reduce a Haar measurement on C^n to r x r weights and report the search result."""
    if not 1 <= r <= n:
        raise ConfigError(f"need 1 <= r <= n, got r={r}, n={n}")
    rng = make_rng(seed, 40, n, r)
    s = Subspace.canonical(n, r)
    U = haar_unitary(n, rng)
    frame = project_frame(U, s)
    res = search_partition(frame, budget, rng)
    wl = build_weights(frame, res.best_perm, res.best_phases)
    rho, tau = random_density(r, rng), random_density(r, rng)
    return {
        "n": n, "r": r, "T": wl.T, "m": frame.m, "seed": seed, "budget": budget,
        "rng_algorithm": RNG_ALGORITHM,
        "perm": wl.perm.tolist(), "phases": wl.phases.tolist(),
        "weights": [_cjson(L) for L in wl.weights],
        "variance_opnorm": operator_norm(variance_matrix(wl)),
        "initial_opnorm": res.initial_opnorm,
        "partition_of_unity_residual": wl.partition_of_unity_residual(),
        "decomposition_residual": decomposition_residual(U, s, wl, rho, tau),
    }


def moment_ratio_table(r_values=(2, 3), k_values=(2, 3), T_values=(4, 8, 16),
                       samples: int = 20_000, seed: int = 0) -> list[dict]:
    """F(k) estimates on Haar frames next to the moment bracket, one row per (r, k, T)."""
    out = []
    for r in r_values:
        for k in k_values:
            if k > r:
                continue
            for T in T_values:
                rng = make_rng(seed, 50, r, k, T)
                n = r * T
                frame = project_frame(haar_unitary(n, rng), Subspace.canonical(n, r))
                mean, se = estimate_Fk(frame, k, samples, rng)
                bound = moment_bound_reference(r, k, T)
                out.append({"r": r, "k": k, "T": T, "F_mean": mean, "F_stderr": se,
                            "bracket": bound, "ratio": mean / bound})
    return out
