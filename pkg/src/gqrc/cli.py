"""Command-line entry point.

    gqrc <task> [--config PATH] [--seed U64] [--out DIR] [--override k=v]...

Tasks are the figure ids (fig2a ... fig5), the single-run tasks ``ipc``
and ``snr``, and ``validate``.  Each run writes one CSV dataset plus a
JSON manifest carrying the resolved config, per-realization seeds, wall
times, and the SHA-256 of the CSV.  Exit codes: 0 success, 2 config
error, 3 numerical failure (or any failed validation check).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .config import TASKS, parse_config, serialize_config
from .errors import ConfigError, NumericalError
from .experiments import run_experiment
from .runio import write_csv, write_manifest
from .validate import VALIDATE_SCHEMA, run_validation


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqrc",
        description="Pulse-loop Gaussian quantum reservoir computing experiments",
    )
    parser.add_argument("task", choices=TASKS, help="figure id or task to run")
    parser.add_argument("--config", type=Path, default=None,
                        help="key = value config file (sections per module)")
    parser.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--override", action="append", default=[],
                        metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    parser.add_argument("--version", action="version", version=f"gqrc {__version__}")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(
            path=args.config,
            overrides=args.override,
            task=args.task,
            seed=args.seed,
            output_dir=str(args.out) if args.out is not None else None,
        )
    except (ConfigError, OSError) as err:
        print(f"gqrc: config error: {err}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.output_dir)
    started = time.time()
    try:
        if cfg.task == "validate":
            results = run_validation(cfg.master_seed)
            rows = [r.row() for r in results]
            schema = VALIDATE_SCHEMA
            seeds: list[int] = [cfg.master_seed]
            failures = [r.name for r in results if not r.passed]
            for r in results:
                status = "pass" if r.passed else "FAIL"
                print(f"[{status}] {r.name}: value {r.value:.6g} ({r.expected})")
            exit_code = 0 if not failures else 3
        else:
            result = run_experiment(cfg)
            rows, schema = result.rows, result.schema
            seeds, failures = result.realization_seeds, result.failures
            exit_code = 0
    except ConfigError as err:
        print(f"gqrc: config error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"gqrc: numerical failure: {err}", file=sys.stderr)
        return 3

    elapsed = time.time() - started
    csv_path = write_csv(out_dir / f"{cfg.task}.csv", schema, rows)
    (out_dir / f"{cfg.task}.cfg").write_text(serialize_config(cfg), encoding="utf-8")
    manifest_path = write_manifest(
        out_dir / f"{cfg.task}.manifest.json",
        cfg,
        [csv_path],
        seeds,
        {"total": elapsed},
        failures,
        __version__,
    )
    print(f"gqrc: wrote {csv_path} and {manifest_path} in {elapsed:.1f}s")
    if cfg.task == "validate" and exit_code != 0:
        print(f"gqrc: {len(failures)} validation check(s) failed", file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
