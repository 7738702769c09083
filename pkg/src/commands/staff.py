"""
staff - bed recommendations under the QD, ED and QED regimes

With --regime all, prints the staffing table for both global constraints
(P{Ab} <= alpha and E[W] <= M). The exact searches report P{Ab} and E[W] at
the recommended N and at N - 1, which certifies minimality.
"""

import argparse
import logging

from config import EXIT_OK
from src.commands.common import add_common_arguments, load_scenario, output_directory, run_provenance, slug
from src.experiments.outputs import write_table_document
from src.queueing.staffing import staffing_table
from src.utils.reporting import render_table, staffing_frame

logger = logging.getLogger(__name__)

REGIMES = ("qd", "ed", "qed", "exact-ab", "exact-wait", "all")


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("staff", help="bed recommendations per staffing regime")
    add_common_arguments(parser)
    parser.add_argument("--regime", choices=REGIMES, help="regime; [capacity] regime by default")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args)
    title = f"{scenario.name}: R={scenario.params.offered_load:.2f}"
    if args.regime == "all":
        qos = scenario.qos
        frame = staffing_table(scenario.params, qos.alpha_global, qos.max_mean_wait)
        print(render_table(frame, title, index=False))
    else:
        result = scenario.staff(args.regime)
        frame = staffing_frame([result])
        print(render_table(frame, title))
        if result.note:
            print(result.note)

    if args.out_dir is not None:
        meta = run_provenance(scenario, [], command="staff", regime=args.regime)
        write_table_document(frame, output_directory(args) / f"staff_{slug(scenario.name)}", meta, args.format)
    return EXIT_OK
