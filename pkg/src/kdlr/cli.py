"""Command line entry point: ``kdlr {run,convergence,bench} CONFIG``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from threadpoolctl import threadpool_limits

from .config import parse_config
from .experiments import run_bench, run_convergence, run_experiment

COMMANDS = {"run": run_experiment, "convergence": run_convergence, "bench": run_bench}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kdlr", description="Low-rank high-field kinetic solver experiments.")
    p.add_argument("--threads", type=int, default=None, help="cap BLAS/LAPACK threads (default: $KDLR_THREADS)")
    p.add_argument("--output", default=None, help="output directory (overrides the config's 'output')")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", type=Path)
    return p


def thread_limit(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get("KDLR_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"kdlr: KDLR_THREADS must be an integer, got {env!r}") from None
    return None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    threads = thread_limit(args.threads)
    if threads is not None and threads < 1:
        print("kdlr: --threads must be positive", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
        if args.output is not None:
            cfg = replace(cfg, output=args.output)
        with threadpool_limits(limits=threads):
            COMMANDS[args.command](cfg, cfg.output)
    except Exception as exc:  # report every failure as a one-line diagnostic
        print(f"kdlr {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
