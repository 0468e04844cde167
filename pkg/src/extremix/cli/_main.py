from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from ._config import load_config, resolve_seed
from ._runner import COMMANDS, ExperimentRunner

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

DEBUG_EXCEPTIONS = "EXTREMIX_DEBUG_EXCEPTIONS"

_HELP = {
    "simulate": "Simulate the configured model and write it as CSV.",
    "estimate": "Block estimates of θ, θ*, θ** over the τ grid.",
    "bounds": "Classic, chain and permutation bounds on θ(τ).",
    "decomp": "Finite-n checks of the two decomposition identities.",
    "tail": "χ, χ̄, madogram and η of margin pairs.",
    "reproduce-paper": "Closed forms and Monte-Carlo checks of reference processes.",
}


def _u64(value: str) -> int:
    try:
        seed = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {value!r}") from None
    if not 0 <= seed < 2**64:
        msg = f"seed {value!r} is not an unsigned 64-bit int"
        raise argparse.ArgumentTypeError(msg)
    return seed


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML experiment file")
    common.add_argument("--seed", type=_u64, help="master RNG seed (overrides config)")
    common.add_argument("--threads", type=_positive, help="worker threads")
    common.add_argument("--out", type=Path, default=Path(), help="output directory")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    parser = argparse.ArgumentParser(
        prog="extremix",
        description="Multivariate extremal index experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sub.add_parser(
            name, parents=[common], help=_HELP[name], description=_HELP[name]
        )
    return parser


def _configure_logging(verbosity: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``extremix`` command; returns the exit status."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.config is None and args.command != "reproduce-paper":
            raise ValueError(f"{args.command} needs --config PATH")
        config = load_config(args.config) if args.config is not None else None
        seed = resolve_seed(args.seed, config)
        runner = ExperimentRunner(config, seed, args.threads, args.out)
        runner.run(args.command)
    except Exception as e:
        if os.getenv(DEBUG_EXCEPTIONS) in ("1", "true", "True"):
            raise
        print(f"extremix: error: {e}", file=sys.stderr)
        return 1
    return 0
