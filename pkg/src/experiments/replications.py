"""
Replication harness and scenario comparison

This module defines:
- MetricSummary, mean, standard deviation and 95% half-width of one metric
- ReplicationSummary, the per-replication frame of a scenario and its summaries
- run_replications, which runs n replications on the seed ladder
- compare_scenarios, which runs several scenarios on the same seed ladder

Replication r always uses the random streams of (base_seed, r), so the first
n replications of a longer run are the same n replications, and scenarios
compared side by side see common random numbers.
"""

import concurrent.futures
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import BASE_SEED, CONFIDENCE_Z, REPLICATIONS
from src.errors import InputValidationError
from src.simulation.shelter import ScenarioConfig, run_replication

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricSummary:
    """Normal-approximation summary; ci95 = z * sd / sqrt(n)."""

    mean: float
    sd: float
    ci95: float
    n: int

    @classmethod
    def from_values(cls, values: Sequence[float], z: float = CONFIDENCE_Z) -> "MetricSummary":
        data = np.asarray(values, dtype=float)
        if data.size < 2:
            raise InputValidationError("a summary needs at least two replications")
        sd = float(data.std(ddof=1))
        return cls(float(data.mean()), sd, z * sd / math.sqrt(data.size), int(data.size))


@dataclass
class ReplicationSummary:
    """
    Replications of one scenario.

    Args:
        scenario (str): Scenario name
        base_seed (int): Root of the seed ladder
        replications (pd.DataFrame): One row per replication, indexed by replication number
    """

    scenario: str
    base_seed: int
    replications: pd.DataFrame

    @property
    def n(self) -> int:
        return len(self.replications)

    def metric(self, name: str) -> MetricSummary:
        if name not in self.replications:
            raise InputValidationError(f"unknown metric {name!r}")
        return MetricSummary.from_values(self.replications[name])

    def summary_frame(self) -> pd.DataFrame:
        """Columns scenario, metric, mean, sd, ci95, n; one row per metric."""
        rows = []
        for name in self.replications.columns:
            stats = self.metric(name)
            rows.append(
                {"scenario": self.scenario, "metric": name, "mean": stats.mean, "sd": stats.sd,
                 "ci95": stats.ci95, "n": stats.n}
            )
        return pd.DataFrame(rows, columns=["scenario", "metric", "mean", "sd", "ci95", "n"])


def _replicate(job: tuple[ScenarioConfig, int, int, tuple[float, ...]]) -> tuple[int, dict[str, float]]:
    config, base_seed, replication, wait_days = job
    return replication, run_replication(config, base_seed, replication).as_record(wait_days)


def run_replications(
    config: ScenarioConfig,
    n: int = REPLICATIONS,
    base_seed: int = BASE_SEED,
    workers: int = 1,
    progress: bool = False,
    wait_days: tuple[float, ...] = (),
) -> ReplicationSummary:
    """
    Run replications 0..n-1 of a scenario.

    Args:
        config (ScenarioConfig): Scenario to simulate
        n (int): Number of replications, >= 2
        base_seed (int): Root of the seed ladder
        workers (int): Worker processes; 1 runs in this process
        progress (bool): Show a progress bar
        wait_days (tuple): Per-group wait limits T_j whose exceedance is recorded

    Returns:
        ReplicationSummary: Per-replication metrics in replication order
    """
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InputValidationError(f"need at least 2 replications, got {n!r}")
    if workers < 1:
        raise InputValidationError(f"workers must be >= 1, got {workers!r}")

    jobs = [(config, base_seed, r, tuple(wait_days)) for r in range(int(n))]
    rows: dict[int, dict[str, float]] = {}
    with tqdm(total=len(jobs), desc=config.name, unit="rep", disable=not progress) as bar:
        if workers == 1:
            for job in jobs:
                replication, row = _replicate(job)
                rows[replication] = row
                bar.update()
        else:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_replicate, job) for job in jobs]
                for future in concurrent.futures.as_completed(futures):
                    replication, row = future.result()
                    rows[replication] = row
                    bar.update()

    frame = pd.DataFrame.from_dict(rows, orient="index").sort_index()
    frame.index.name = "replication"
    logger.info(
        "%s: %d replications, abandonment %.2f%%, utilization %.2f%%",
        config.name,
        len(frame),
        100 * frame["abandonment"].mean(),
        100 * frame["utilization"].mean(),
    )
    return ReplicationSummary(config.name, base_seed, frame)


@dataclass
class ScenarioComparison:
    """Summaries of several scenarios run on the same seed ladder."""

    summaries: list[ReplicationSummary]

    def frame(self) -> pd.DataFrame:
        """Metric means, one column per scenario."""
        return pd.DataFrame(
            {s.scenario: s.replications.mean(axis=0) for s in self.summaries}
        )

    def summary_frame(self) -> pd.DataFrame:
        return pd.concat([s.summary_frame() for s in self.summaries], ignore_index=True)

    def layout(self) -> pd.DataFrame:
        """
        Side-by-side report: utilization, abandonment percent with counts and
        mean wait per group and for the whole system, high-risk abandoners.
        """
        means = self.frame()
        labels = [c.removeprefix("arrivals_") for c in means.index if c.startswith("arrivals_")]
        rows: dict[str, list[str]] = {"Utilization": [f"{100 * v:.2f}%" for v in means.loc["utilization"]]}
        for label in labels + ["Whole system"]:
            suffix = "" if label == "Whole system" else f"_{label}"
            rows[f"Abandonment {label}"] = [
                f"{100 * p:.2f}% ({count:.0f} youth)"
                for p, count in zip(means.loc[f"abandonment{suffix}"], means.loc[f"abandoned{suffix}"])
            ]
        for label in labels + ["Whole system"]:
            suffix = "" if label == "Whole system" else f"_{label}"
            rows[f"Average wait {label}"] = [f"{w:.3f} days" for w in means.loc[f"mean_wait{suffix}"]]
        rows["High-risk abandoners"] = [f"{v:.1f} youth" for v in means.loc["high_risk_abandoned"]]
        return pd.DataFrame.from_dict(rows, orient="index", columns=list(means.columns)).rename_axis("metric")


def compare_scenarios(
    configs: Sequence[ScenarioConfig],
    n: int = REPLICATIONS,
    base_seed: int = BASE_SEED,
    workers: int = 1,
    progress: bool = False,
    wait_days: tuple[float, ...] = (),
) -> ScenarioComparison:
    """Run every scenario with the same seed ladder so columns share random numbers."""
    names = [config.name for config in configs]
    if len(set(names)) != len(names):
        raise InputValidationError(f"scenario names must be unique, got {names}")
    return ScenarioComparison(
        [run_replications(config, n, base_seed, workers, progress, wait_days) for config in configs]
    )
