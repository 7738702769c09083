"""
This module runs the shelter queue analyzer from the command line.
It parses the subcommand, sets up logging and reports errors as exit codes.
"""

import argparse
import logging
import sys

from src.commands import analyze, simulate, staff, sweep, thresholds
from src.errors import ShelterQueueError
from src.utils.log import setup_logging, verbosity_level

logger = logging.getLogger("shelterq")

COMMANDS = (analyze, staff, thresholds, simulate, sweep)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shelterq",
        description="Capacity and prioritization analysis for a youth shelter queue",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Main entry point for the analyzer.
    Returns the process exit code.
    """
    args = build_parser().parse_args(argv)
    setup_logging(verbosity_level(args.verbose, args.quiet))
    try:
        return args.handler(args)
    except ShelterQueueError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"shelterq {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
