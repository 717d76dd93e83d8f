"""Command line entry point.

    augmc toy --seed 7 --out runs/toy --set ensemble.exchange=swap
    augmc fhmm-sim --config sim.ini --repeats 10 --jobs 4
    augmc check
"""
from __future__ import annotations

import argparse
import logging
import sys

from augmc import BACKEND, __version__
from augmc.config import EXPERIMENTS, apply_override, default_config, load_config, validate_config
from augmc.runner import run_experiment

log = logging.getLogger("augmc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="augmc", description="Tempered ensemble MCMC with crossover exchanges.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", metavar="PATH", help="INI config file or JSON snapshot")
        p.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--repeats", type=int, help="number of independent repeats")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one config entry; repeatable")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for repeats (default 1)")

    p = sub.add_parser("check", help="run the enumeration self-checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def resolve_config(args):
    if args.config:
        cfg = load_config(args.config, base=default_config(args.command))
        if cfg.experiment != args.command:
            raise ValueError(f"config file is for experiment {cfg.experiment!r}, not {args.command!r}")
    else:
        cfg = default_config(args.command)
    for assignment in args.overrides:
        apply_override(cfg, assignment)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    if args.repeats is not None:
        cfg.repeats = args.repeats
    return validate_config(cfg)


def run_check(seed: int) -> int:
    from augmc.checks import run_checks

    failed = 0
    for name, passed, detail in run_checks(seed):
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        failed += not passed
    print(f"{failed} check(s) failed" if failed else "all checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check":
            return run_check(args.seed)
        if args.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        cfg = resolve_config(args)
        dirs = run_experiment(cfg, jobs=args.jobs)
    except (ValueError, OSError) as exc:
        print(f"augmc: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(dirs)} run(s) under {cfg.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
