"""
simulate - replicate the scenario (or each of its variants)

Writes one row per replication and a summary document to the output
directory. With several variants the scenarios share the seed ladder and
the side-by-side comparison is printed. --trace records replication 0 of
each scenario and checks every admission against the threshold policy.
"""

import argparse
import logging

from config import EXIT_NUMERICAL, EXIT_OK
from src.commands.common import add_common_arguments, load_scenario, output_directory, run_provenance, slug
from src.experiments.outputs import write_replication_csv, write_summary_document, write_table_document
from src.experiments.replications import compare_scenarios
from src.simulation.shelter import run_replication
from src.simulation.trace import read_trace, verify_threshold_trace, write_trace
from src.utils.reporting import render_table

logger = logging.getLogger(__name__)

HEADLINE_METRICS = ("utilization", "abandonment", "mean_wait", "abandoned", "high_risk_abandoned")


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="replicated discrete-event simulation")
    add_common_arguments(parser)
    parser.add_argument("--workers", type=int, help="worker processes; overrides [simulation] workers")
    parser.add_argument("--progress", action="store_true", help="show a progress bar")
    parser.add_argument("--trace", action="store_true", help="record and verify the trace of replication 0")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args)
    simulation = scenario.spec.simulation
    workers = args.workers or simulation.workers
    out_dir = output_directory(args)
    configs = scenario.configs()
    wait_days = tuple(cap.days for cap in scenario.qos.wait_caps)

    comparison = compare_scenarios(
        configs, simulation.replications, simulation.base_seed, workers, args.progress, wait_days
    )
    for config, summary in zip(configs, comparison.summaries):
        meta = run_provenance(scenario, [config], command="simulate")
        write_replication_csv(summary.replications, out_dir / f"replications_{slug(config.name)}.csv", meta)

        headline = summary.summary_frame().set_index("metric").loc[list(HEADLINE_METRICS)]
        print(render_table(headline.drop(columns="scenario"), f"{config.name}: N={config.beds}"))
        print()

    meta = run_provenance(scenario, configs, command="simulate")
    write_summary_document(
        comparison.summary_frame(), out_dir / f"summary_{slug(scenario.name)}", meta, fmt=args.format
    )
    if len(configs) > 1:
        layout = comparison.layout()
        print(render_table(layout, f"{scenario.name}: comparison"))
        write_table_document(layout, out_dir / f"comparison_{slug(scenario.name)}", meta, args.format)

    if args.trace:
        return _check_traces(scenario, configs, out_dir)
    return EXIT_OK


def _check_traces(scenario, configs, out_dir) -> int:
    """Write replication 0 of each scenario, read the file back and verify it."""
    base_seed = scenario.spec.simulation.base_seed
    code = EXIT_OK
    for config in configs:
        _, trace = run_replication(config, base_seed, 0, trace=True)
        meta = run_provenance(scenario, [config], command="simulate", replication=0)
        path = write_trace(trace, out_dir / f"trace_{slug(config.name)}.csv", meta)
        trace = read_trace(path)
        verdict = verify_threshold_trace(trace)
        if verdict:
            logger.info("%s: %d trace records follow the threshold policy", config.name, len(trace.records))
        else:
            logger.error("%s: trace record %s violates the policy: %s", config.name, verdict.index, verdict.reason)
            print(f"trace violation in {path}: {verdict.violation}")
            code = EXIT_NUMERICAL
    return code
