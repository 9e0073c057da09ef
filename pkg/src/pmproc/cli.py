"""Command line driver: ``pmproc sweep | verify | plot | decompose``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .errors import ConfigError, ParseError, PMProcError, ResultsIOError, UnknownSelector
from .manifold import OptConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default_seed():
    env = os.environ.get("PMPROC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"PMPROC_SEED must be an integer, got {env!r}")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ResultsIOError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def build_sweep_config(args):
    from .experiments import SweepConfig

    cfg = _load_config(args.config)
    opt_fields = set(asdict(OptConfig()))
    opt_cfg = dict(cfg.get("opt", {}))
    if set(opt_cfg) - opt_fields:
        raise ConfigError(f"unknown opt keys: {sorted(set(opt_cfg) - opt_fields)}")
    for flag, name in [("tmax", "t_max"), ("step", "step"), ("restarts", "restarts"),
                       ("restarts_num", "restarts_num"), ("grad_tol", "grad_tol")]:
        if getattr(args, flag) is not None:
            opt_cfg[name] = getattr(args, flag)
    seeds = args.seed or cfg.get("seeds") or [_default_seed()]
    try:
        return SweepConfig(
            r_values=tuple(args.r or cfg.get("r_values", [2])),
            n_offsets=tuple(args.n_offset or cfg.get("n_offsets", [1])),
            seeds=tuple(int(s) for s in seeds),
            opt=OptConfig(**opt_cfg),
            output_dir=args.out or cfg.get("output_dir", "."),
            workers=args.workers if args.workers is not None else cfg.get("workers", 1),
            numerator_init=args.numerator_init or cfg.get("numerator_init", "aligned"),
            timing=bool(args.timing or cfg.get("timing", False)),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sweep(args) -> int:
    from .experiments import median_k_hat, read_results, run_sweep

    cfg = build_sweep_config(args)
    path = run_sweep(cfg)
    print(f"wrote {path}")
    if not args.no_plot:
        from .plotting import emit_plot
        svg = emit_plot(path, path.with_suffix(".svg"))
        print(f"wrote {svg}")
    for (r, n), k in median_k_hat(read_results(path)).items():
        print(f"r={r} n={n} median_k_hat={k:.6f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .experiments import run_verify

    seed = args.seed if args.seed is not None else _default_seed()
    path, status = run_verify(args.suite, seed, args.out)
    report = json.loads(Path(path).read_text())
    for c in report["checks"]:
        tag = "PASS" if c["failures"] == 0 else "FAIL"
        print(f"{tag} {c['name']}: {c['failures']}/{c['instances']} failures, "
              f"worst slack {c['worst_slack']}")
    print(f"wrote {path}")
    return EXIT_FAIL if status else EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import emit_plot

    print(f"wrote {emit_plot(args.results, args.out)}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    from .experiments import decompose

    seed = args.seed if args.seed is not None else _default_seed()
    data = decompose(args.n, args.r, seed, args.budget)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise ResultsIOError(f"cannot write {args.out}: {exc}") from exc
        print(f"wrote {args.out}  variance_opnorm={data['variance_opnorm']:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmproc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="estimate k_hat over a grid of (r, n, seed)")
    s.add_argument("--config", help="JSON config file; flags override its keys")
    s.add_argument("--r", type=int, nargs="+")
    s.add_argument("--n-offset", type=int, nargs="+", dest="n_offset")
    s.add_argument("--seed", type=int, nargs="+")
    s.add_argument("--tmax", type=int)
    s.add_argument("--step", type=float)
    s.add_argument("--restarts", type=int, help="subspace restarts (denominator)")
    s.add_argument("--restarts-num", type=int, dest="restarts_num", help="full-space restarts")
    s.add_argument("--grad-tol", type=float, dest="grad_tol")
    s.add_argument("--out", help="output directory")
    s.add_argument("--workers", type=int)
    s.add_argument("--numerator-init", choices=["aligned", "haar"], dest="numerator_init")
    s.add_argument("--timing", action="store_true", help="record wall_ms (breaks byte identity)")
    s.add_argument("--no-plot", action="store_true", dest="no_plot")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run a verification campaign")
    v.add_argument("--suite", default="all", help="frames, randomization, inequalities or all")
    v.add_argument("--seed", type=int)
    v.add_argument("--out", default="verify.json")
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", help="render a results CSV to SVG")
    pl.add_argument("results")
    pl.add_argument("--out", default="results.svg")
    pl.set_defaults(func=cmd_plot)

    d = sub.add_parser("decompose", help="dump a weight list for a Haar measurement")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--r", type=int, required=True)
    d.add_argument("--seed", type=int)
    d.add_argument("--budget", type=int, default=1000)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownSelector, ParseError, ResultsIOError) as exc:
        print(f"pmproc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PMProcError as exc:
        print(f"pmproc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
