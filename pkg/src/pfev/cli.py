"""Command-line interface: single runs, benchmark matrices, and studies.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical failure.
The default output root comes from the PFEV_OUTPUT_ROOT environment variable
(falling back to ./pfev-out).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, NumericalError
from .harness import (
    ProblemSpec,
    RunConfig,
    _spec_from_dict,
    config_from_dict,
    estimator_study,
    gap_study,
    run_bo,
)
from .benchmarks import reference_frontier

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
OUTPUT_ROOT_ENV = "PFEV_OUTPUT_ROOT"


def _output_root(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "pfev-out"))


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc


def _run_config_from_args(args) -> RunConfig:
    payload = _load_json(args.config) if args.config else {}
    cfg = config_from_dict(payload)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.strategy is not None:
        cfg = replace(cfg, strategy=args.strategy)
    if args.iterations is not None:
        cfg = replace(cfg, iterations=args.iterations)
    return cfg


def _cmd_run(args) -> int:
    cfg = _run_config_from_args(args)
    root = _output_root(args)
    out_dir = root / f"run-{cfg.strategy}-seed{cfg.seed}"
    cache = root / "ref-cache"
    history = run_bo(cfg, out_dir=out_dir, cache_dir=cache)
    print(f"wrote {out_dir} (final RHV {history.final_rhv():.4f})")
    return EXIT_OK


def _cmd_bench(args) -> int:
    from . import reporting

    payload = _load_json(args.config)
    base = payload.get("base", {})
    problems = payload.get("problems")
    strategies = payload.get("strategies")
    seeds = payload.get("seeds")
    if not problems or not strategies or not seeds:
        raise ConfigError("bench config requires problems, strategies, and seeds")

    root = _output_root(args) / "bench"
    cache = _output_root(args) / "ref-cache"
    summary_rows = []
    for problem_payload in problems:
        spec = _spec_from_dict(ProblemSpec, problem_payload)
        problem = spec.build()
        base_cfg = config_from_dict({**base, "problem": problem_payload})
        reference = reference_frontier(
            problem,
            base_cfg.reference.generations,
            base_cfg.reference.population,
            base_cfg.reference.seed,
            cache,
        )
        jobs = []
        for strategy in strategies:
            for seed in seeds:
                cfg = replace(base_cfg, strategy=strategy, seed=int(seed))
                out_dir = root / problem.problem_id / strategy / f"seed{seed}"
                jobs.append((cfg, out_dir))

        def execute(job):
            cfg, out_dir = job
            return cfg, run_bo(cfg, out_dir=out_dir, reference=reference)

        if args.threads > 1:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                results = list(pool.map(execute, jobs))
        else:
            results = [execute(job) for job in jobs]

        series_by_strategy = {}
        for strategy in strategies:
            histories = [h for cfg, h in results if cfg.strategy == strategy]
            rows = reporting.rhv_series(histories)
            reporting.emit_table(
                rows,
                root / problem.problem_id / f"series_{strategy}.csv",
                kind="rhv-series",
            )
            series_by_strategy[strategy] = rows
            for cfg, history in results:
                if cfg.strategy == strategy:
                    summary_rows.append(
                        {
                            "problem": problem.problem_id,
                            "strategy": strategy,
                            "seed": cfg.seed,
                            "final_rhv": history.final_rhv(),
                        }
                    )
        reporting.plot_rhv_bands(
            series_by_strategy,
            root / problem.problem_id / "rhv_compare.png",
            title=problem.problem_id,
        )
    reporting.emit_table(summary_rows, root / "final_rhv.csv", kind="bench-summary")
    print(f"wrote {root}")
    return EXIT_OK


def _cmd_gap_study(args) -> int:
    from . import reporting

    rows = []
    for n_obj in args.objectives:
        rows.extend(gap_study(n_obj, args.sizes, range(args.seeds)))
    out = _output_root(args) / "gap-study"
    reporting.emit_table(rows, out / "gap_study.csv", kind="gap-study")
    reporting.plot_gap_study(rows, out / "gap_study.png")
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_estimator_study(args) -> int:
    from . import reporting

    rows = estimator_study(
        n_seeds=args.seeds,
        k_values=tuple(args.k_values),
        gt_samples=args.gt_samples,
    )
    out = _output_root(args) / "estimator-study"
    reporting.emit_table(rows, out / "estimator_study.csv", kind="estimator-study")
    reporting.plot_estimator_study(rows, out / "estimator_study.png")
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_ref_frontier(args) -> int:
    payload = _load_json(args.config)
    problem_payload = payload.get("problem", payload)
    spec = _spec_from_dict(ProblemSpec, problem_payload)
    problem = spec.build()
    cache = _output_root(args) / "ref-cache"
    frontier = reference_frontier(
        problem, args.generations, args.population, args.seed or 0, cache
    )
    print(f"cached reference frontier for {problem.problem_id}: {len(frontier)} points")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfev", description="Multi-objective Bayesian optimization toolkit"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output directory root")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--strategy", default=None)
    common.add_argument("--iterations", type=int, default=None)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single optimization run")
    sub.add_parser("bench", parents=[common], help="problems x strategies x seeds")

    gap = sub.add_parser("gap-study", parents=[common], help="truncation volume gap")
    gap.add_argument("--objectives", type=int, nargs="+", default=[2, 3])
    gap.add_argument(
        "--sizes", type=int, nargs="+", default=[10, 50, 100, 500, 1000]
    )
    gap.add_argument("--gap-seeds", dest="seeds", type=int, default=5)

    est = sub.add_parser(
        "estimator-study", parents=[common], help="estimator accuracy on the 1-d toy"
    )
    est.add_argument("--study-seeds", dest="seeds", type=int, default=50)
    est.add_argument("--gt-samples", type=int, default=100_000)
    est.add_argument("--k-values", type=int, nargs="+", default=[10, 100, 1000])

    ref = sub.add_parser(
        "ref-frontier", parents=[common], help="build or refresh a reference frontier"
    )
    ref.add_argument("--generations", type=int, default=10_000)
    ref.add_argument("--population", type=int, default=100)
    return parser


_COMMANDS = {
    "run": _cmd_run,
    "bench": _cmd_bench,
    "gap-study": _cmd_gap_study,
    "estimator-study": _cmd_estimator_study,
    "ref-frontier": _cmd_ref_frontier,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
