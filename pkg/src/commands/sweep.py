"""
sweep - one-parameter sensitivity series

Replicates the scenario at each value of lambda, mu or theta and writes a
plot-ready series (parameter, value, metric, mean, sd, ci95, n). The grid
comes from --values, then the file's [sweep] section, then the default grid
for that parameter.
"""

import argparse
import logging

from config import EXIT_OK
from src.commands.common import add_common_arguments, load_scenario, output_directory, run_provenance, slug
from src.errors import InputValidationError
from src.experiments.outputs import write_series
from src.experiments.sweeps import sweep
from src.utils.reporting import render_table

logger = logging.getLogger(__name__)


def parse_values(text: str | None) -> list[float] | None:
    """'0,0.33,0.5' -> [0.0, 0.33, 0.5]."""
    if not text:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InputValidationError(f"--values must be comma-separated numbers, got {text!r}") from exc


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="sensitivity series over lambda, mu or theta")
    add_common_arguments(parser)
    parser.add_argument("--parameter", choices=("lambda", "mu", "theta"), help="[sweep] parameter by default")
    parser.add_argument("--values", help="comma-separated grid, e.g. 0,0.33,0.5,1")
    parser.add_argument("--workers", type=int, help="worker processes; overrides [simulation] workers")
    parser.add_argument("--progress", action="store_true", help="show a progress bar")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args)
    simulation = scenario.spec.simulation
    spec = scenario.sweep_spec(args.parameter, parse_values(args.values))
    config = scenario.base_config()

    series = sweep(
        config,
        spec,
        simulation.replications,
        simulation.base_seed,
        args.workers or simulation.workers,
        args.progress,
    )
    meta = run_provenance(scenario, [config], command="sweep", sweep=spec.parameter, values=list(spec.values))
    path = output_directory(args) / f"sweep_{slug(scenario.name)}_{spec.parameter}"
    write_series(series, path, meta, fmt=args.format)

    table = series.pivot(index="value", columns="metric", values="mean")
    print(render_table(table, f"{scenario.name}: {spec.parameter} sweep"))
    return EXIT_OK
