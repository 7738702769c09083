"""
analyze - Erlang-A metrics of a scenario's bed count

Prints P{W>0}, P{Ab|W>0}, P{Ab}, E[W] and occupancy for the scenario's N
(or --beds) and, with abandonment, two cross-checks: the incomplete-gamma
value of P{Ab|W>0} and E[W] recovered as P{Ab} / theta.
"""

import argparse
import logging

from config import EXIT_OK
from src.commands.common import add_common_arguments, load_scenario, output_directory, run_provenance, slug
from src.experiments.outputs import write_table_document
from src.queueing.erlang import erlang_a_metrics, mean_wait_from_abandonment, p_ab_given_wait_closed_form
from src.utils.reporting import metrics_frame, render_table

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("analyze", help="steady-state Erlang-A metrics")
    add_common_arguments(parser)
    parser.add_argument("--beds", type=int, help="bed count; overrides [capacity]")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args)
    beds = args.beds or scenario.beds
    metrics = erlang_a_metrics(beds, scenario.params)
    frame = metrics_frame(metrics)
    if scenario.params.theta > 0:
        frame.loc["P{Ab|W>0} closed form", "value"] = p_ab_given_wait_closed_form(beds, scenario.params)
        frame.loc["E[W] from P{Ab}/theta", "value"] = mean_wait_from_abandonment(metrics.p_ab, scenario.params.theta)
    print(render_table(frame, f"{scenario.name}: N={beds}, R={scenario.params.offered_load:.2f}"))

    if args.out_dir is not None:
        meta = run_provenance(scenario, [], command="analyze", beds=beds)
        write_table_document(frame, output_directory(args) / f"analyze_{slug(scenario.name)}", meta, args.format)
    return EXIT_OK
