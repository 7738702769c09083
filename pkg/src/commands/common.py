"""
Helpers shared by the subcommands

This module defines:
- add_common_arguments, the flags every subcommand accepts
- output_directory, resolving --out-dir against the environment
- load_scenario, applying --seed and --reps to a scenario file
- run_provenance, the provenance block every output file carries
"""

import argparse
import logging
import os
import re
from pathlib import Path
from typing import Any

from config import DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV, OUTPUT_FORMATS
from src.errors import InputValidationError
from src.experiments.outputs import provenance
from src.scenarios.resolve import Scenario
from src.simulation.shelter import ScenarioConfig

logger = logging.getLogger(__name__)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", type=Path, help="scenario file (TOML)")
    parser.add_argument("--seed", type=int, help="base seed; overrides [simulation] base_seed")
    parser.add_argument("--reps", type=int, help="replications; overrides [simulation] replications")
    parser.add_argument(
        "--out-dir", type=Path, help=f"output directory (default ${OUTPUT_DIR_ENV} or ./{DEFAULT_OUTPUT_DIR})"
    )
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default="csv", help="output file format")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    parser.add_argument("-q", "--quiet", action="count", default=0, help="less log output")


def output_directory(args: argparse.Namespace) -> Path:
    """--out-dir, then the environment variable, then ./results."""
    if args.out_dir is not None:
        return args.out_dir
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def load_scenario(args: argparse.Namespace) -> Scenario:
    """Read the scenario file and apply command-line overrides."""
    scenario = Scenario.load(args.scenario)
    simulation = scenario.spec.simulation
    if args.seed is not None:
        if args.seed < 0:
            raise InputValidationError(f"--seed must be >= 0, got {args.seed}")
        simulation.base_seed = args.seed
    if args.reps is not None:
        if args.reps < 2:
            raise InputValidationError(f"--reps must be >= 2, got {args.reps}")
        simulation.replications = args.reps
    return scenario


def slug(name: str) -> str:
    """File-name friendly form of a scenario name."""
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "scenario"


def run_provenance(scenario: Scenario, configs: list[ScenarioConfig], **extra: Any) -> dict[str, Any]:
    """Resolved scenarios, seed, replications and the loaded scenario file, plus `extra`."""
    simulation = scenario.spec.simulation
    settings = scenario.spec.model_dump(mode="json", by_alias=True)
    return provenance(configs, simulation.base_seed, simulation.replications, settings=settings, **extra)
