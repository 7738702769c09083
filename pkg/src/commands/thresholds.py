"""
thresholds - reservation thresholds for the scenario's bed count

Prints the policy, the cumulative loads sigma_j and each group's delay
probability. --mode calibrate searches thresholds by simulation instead of
the analytic recursion; --reps then sets the replications per trial.
"""

import argparse
import logging

from config import EXIT_OK
from src.commands.common import add_common_arguments, load_scenario, output_directory, run_provenance, slug
from src.experiments.outputs import write_table_document
from src.queueing.erlang import erlang_a_metrics
from src.queueing.thresholds import class_delay_profile, cumulative_loads
from src.utils.reporting import policy_banner, policy_frame, render_table

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("thresholds", help="analytic or calibrated reservation thresholds")
    add_common_arguments(parser)
    parser.add_argument("--mode", choices=("analytic", "calibrate"), help="[policy] thresholds by default")
    parser.add_argument("--beds", type=int, help="bed count; overrides [capacity]")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args)
    beds = args.beds or scenario.beds
    if args.mode == "calibrate":
        policy = scenario.calibrated_policy(beds, reps=args.reps)
    else:
        policy = scenario.policy(mode=args.mode, beds=beds)
    policy.warn_if_starving(beds)

    class_mix = scenario.class_mix
    loads = cumulative_loads(class_mix.rates, beds, scenario.params.mu)
    p_wait_lowest = erlang_a_metrics(beds, scenario.params).p_wait
    profile = class_delay_profile(policy, loads, p_wait_lowest)
    frame = policy_frame(policy, class_mix.labels, loads, profile)

    print(policy_banner(policy))
    print(render_table(frame, f"{scenario.name}: N={beds}"))

    if args.out_dir is not None:
        config = scenario.base_config(beds=beds, policy=policy)
        meta = run_provenance(scenario, [config], command="thresholds", degenerate=policy.degenerate)
        write_table_document(frame, output_directory(args) / f"thresholds_{slug(scenario.name)}", meta, args.format)
    return EXIT_OK
