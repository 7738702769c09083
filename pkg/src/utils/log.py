"""
Logging setup for the command line

Library modules only create named loggers; the command line configures the
root logger once, on stderr, so stdout carries nothing but results.
"""

import logging
import sys

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"


def verbosity_level(verbose: int = 0, quiet: int = 0) -> int:
    """INFO by default, DEBUG with -v, WARNING with -q, ERROR with -qq."""
    levels = [logging.DEBUG, logging.INFO, logging.WARNING, logging.ERROR]
    index = min(max(1 - verbose + quiet, 0), len(levels) - 1)
    return levels[index]


def setup_logging(level: int = logging.INFO) -> None:
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
