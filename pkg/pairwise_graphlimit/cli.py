"""
cli module - Command-line entry point

    pairwise-graphlimit {simulate,graphlimit,converge,meanfield,bench}
        [--config FILE] [--scenario NAME] [--out DIR] [--seed U64] [--threads N] [-v | --quiet]

Exit codes: 0 success, 1 invariant violation, 2 configuration error, 3 solver failure,
4 unexpected internal error.

This module is licensed under the MIT License.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pairwise_graphlimit import __version__
from pairwise_graphlimit.config import BUILTIN_SCENARIOS, resolve_runtime, select_scenario
from pairwise_graphlimit.errors import (
    CollapseError,
    ConfigError,
    ContractError,
    GraphLimitError,
    InvariantViolation,
    QuadratureError,
    SolverError,
)
from pairwise_graphlimit.studies import STUDIES, StudyContext

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INTERNAL = 4


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairwise-graphlimit",
        description="Weighted pairwise opinion dynamics: particle simulations, graph limits and mean-field studies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="configuration file ([section] / key = value)")
    common.add_argument(
        "--scenario",
        help=f"scenario name in the config file, or a built-in: {', '.join(BUILTIN_SCENARIOS)}",
    )
    common.add_argument("--out", help="output directory (env PAIRWISE_GRAPHLIMIT_OUT, default ./results)")
    common.add_argument("--seed", type=_seed, help="unsigned 64-bit seed recorded in every summary")
    common.add_argument("--threads", type=int, help="worker threads (env PAIRWISE_GRAPHLIMIT_THREADS, default 1)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="count", default=0, help="INFO, or DEBUG when repeated")
    verbosity.add_argument("--quiet", action="store_true", help="warnings and errors only")

    descriptions = {
        "simulate": "integrate the particle system at each level and monitor invariants",
        "graphlimit": "solve the graph-limit equation on the reference grid (and cross-check Picard)",
        "converge": "graph-limit convergence study: xi, zeta, g_N and W1 per level",
        "meanfield": "W1 distance between empirical and continuum measures per level",
        "bench": "time the factorised against the brute-force mass right-hand side",
    }
    for name, text in descriptions.items():
        commands.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _configure_logging(verbose: int, quiet: bool) -> None:
    level = logging.WARNING
    if not quiet:
        level = logging.DEBUG if verbose > 1 else logging.INFO if verbose == 1 else logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)

    try:
        scenario = select_scenario(args.config, args.scenario).with_seed(args.seed)
        out_dir, threads = resolve_runtime(args.out, args.threads)
        context = StudyContext(out_dir, threads)
        logger.info("%s: scenario %s, seed %d, %d thread(s), output %s", args.command, scenario.name, scenario.seed, threads, out_dir)
        STUDIES[args.command](scenario, context)
    except ConfigError as error:
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as error:
        print(f"invariant violation: {error}", file=sys.stderr)
        return EXIT_INVARIANT
    except (SolverError, CollapseError, QuadratureError) as error:
        print(f"solver failure: {error}", file=sys.stderr)
        return EXIT_SOLVER
    except ContractError as error:
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except GraphLimitError as error:
        print(f"solver failure: {error}", file=sys.stderr)
        return EXIT_SOLVER
    except Exception as error:
        logger.exception("%s failed unexpectedly", args.command)
        print(f"internal error: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK
