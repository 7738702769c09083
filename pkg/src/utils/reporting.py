"""
Terminal reports

This module renders analysis results as aligned text tables for standard
output:
- Erlang-A metrics of one bed count
- Staffing recommendations with their certificates
- Threshold policies with per-group loads and delay probabilities
- Replication summaries and scenario comparisons
"""

from typing import Iterable, Sequence

import pandas as pd

from src.queueing.erlang import ErlangAMetrics
from src.queueing.staffing import StaffingResult
from src.queueing.thresholds import ClassDelayProfile, CumulativeLoads, ThresholdPolicy


def render_table(frame: pd.DataFrame, title: str | None = None, index: bool = True) -> str:
    """Plain-text table with an optional underlined title."""
    body = frame.to_string(index=index, float_format=lambda v: f"{v:.6g}")
    if not title:
        return body
    return f"{title}\n{'=' * len(title)}\n{body}"


def metrics_frame(metrics: ErlangAMetrics) -> pd.DataFrame:
    rows = [
        ("beds", metrics.beds),
        ("P{W>0}", metrics.p_wait),
        ("P{Ab|W>0}", metrics.p_ab_given_wait),
        ("P{Ab}", metrics.p_ab),
        ("E[W] (days)", metrics.mean_wait),
        ("E[busy beds]", metrics.mean_busy_servers),
        ("occupancy", metrics.occupancy),
        ("E[queue length]", metrics.mean_queue_length),
        ("truncation state", metrics.truncation),
    ]
    return pd.DataFrame(rows, columns=["metric", "value"]).set_index("metric")


def staffing_frame(results: Iterable[StaffingResult]) -> pd.DataFrame:
    """One row per recommendation; exact searches show P{Ab} and E[W] at N and N - 1."""
    rows = []
    for result in results:
        row = {
            "regime": result.regime.value,
            "beds": result.beds,
            "offered load": result.offered_load,
            "beta*": result.beta_star,
            "gamma": result.gamma_used,
        }
        if result.metrics is not None:
            row["P{Ab}(N)"] = result.metrics.p_ab
            row["E[W](N)"] = result.metrics.mean_wait
        if result.previous_metrics is not None:
            row["P{Ab}(N-1)"] = result.previous_metrics.p_ab
            row["E[W](N-1)"] = result.previous_metrics.mean_wait
        rows.append(row)
    return pd.DataFrame(rows).set_index("regime")


def policy_frame(
    policy: ThresholdPolicy,
    labels: Sequence[str],
    loads: CumulativeLoads | None = None,
    profile: ClassDelayProfile | None = None,
) -> pd.DataFrame:
    columns = {"K": list(policy.thresholds)}
    if loads is not None:
        columns["rho"] = list(loads.rho)
        columns["sigma"] = list(loads.sigma)
    if profile is not None:
        columns["P{W>0}"] = list(profile.p_wait_by_class)
    return pd.DataFrame(columns, index=pd.Index(list(labels), name="group"))


def policy_banner(policy: ThresholdPolicy) -> str:
    flag = " [analytically-degenerate]" if policy.degenerate else ""
    return f"thresholds ({policy.source}){flag}: {list(policy.thresholds)}"
