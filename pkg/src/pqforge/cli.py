"""Command-line entry point: ``pqforge <command> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .errors import ParameterError, PreconditionError
from .harness import commands
from .harness.config import load_config, parse_pairs

COMMANDS = ("run", "concentration", "lemma-suite", "mu-dump", "trajectory-dump", "verify")


def _seed_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("instance")
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--p", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--seeds", type=_seed_list, action="extend", help="comma separated, repeatable")
    g.add_argument("--kappa", type=float)
    g.add_argument("--epsilon", help="decimal or rational such as 1/10")
    g.add_argument("--t-max", type=float, dest="t_max", help="set epsilon so that 1 - n^-epsilon equals this")
    g.add_argument("--colors", type=int, dest="num_colors", help="palette size override")
    g.add_argument("--out", help="output root (default $PQFORGE_OUT or ./results)")
    g.add_argument("--jobs", type=int, help="worker processes for independent seeds")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="any other config key")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pqforge", description="Random greedy (p,q)-coloring experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="Phase 1, or Phase 1 and Phase 2, per seed")
    run.add_argument("--mode", choices=("phase1", "full"))
    run.add_argument("--retries", type=int, help="fresh seeds tried after a stuck run")
    sub.add_parser("concentration", parents=[common], help="availability and extension counts against trajectories")
    sub.add_parser("lemma-suite", parents=[common], help="property checks on Platonic types")
    sub.add_parser("mu-dump", parents=[common], help="write the mu table with the derived kappa")
    sub.add_parser("trajectory-dump", parents=[common], help="write t,a,h,H,f_Ava,f_Ext")
    ver = sub.add_parser("verify", parents=[common], help="check a stored coloring")
    ver.add_argument("coloring", help="coloring.txt to check")
    return parser


def config_from_args(args: argparse.Namespace):
    overrides = {}
    for item in args.set:
        overrides.update(parse_pairs(item, "--set"))
    for key in ("p", "q", "n", "kappa", "epsilon", "t_max", "num_colors", "out", "jobs"):
        overrides[key] = getattr(args, key)
    if args.seeds:
        overrides["seeds"] = tuple(args.seeds)
    for key in ("retries", "coloring"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    # run takes its mode from --mode, then the config file, then the default
    mode = args.mode if args.command == "run" else args.command
    return load_config(args.config, overrides, mode)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "run":
            if cfg.mode not in ("phase1", "full"):
                raise ParameterError(f"run needs mode phase1 or full, got {cfg.mode}")
            code, _ = commands.cmd_run(cfg)
        elif args.command == "concentration":
            code, _ = commands.cmd_concentration(cfg)
        elif args.command == "lemma-suite":
            code = commands.cmd_lemma_suite(cfg)
        elif args.command == "mu-dump":
            code = commands.cmd_mu_dump(cfg)
        elif args.command == "trajectory-dump":
            code = commands.cmd_trajectory_dump(cfg)
        else:
            code = commands.cmd_verify(cfg)
    except (ParameterError, PreconditionError, OSError) as exc:
        print(f"pqforge: error: {exc}", file=sys.stderr)
        return commands.EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
