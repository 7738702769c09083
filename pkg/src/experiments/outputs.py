"""
Output writers with provenance

This module defines:
- provenance, the resolved configuration and seed behind an output file
- write_table_csv, any frame as CSV behind provenance comment lines
- write_table_document, any frame as CSV or JSON by output format
- write_replication_csv, one row per replication
- write_summary_document, mean / sd / ci95 / n per scenario and metric
- write_series, plot-ready sweep series

CSV files carry the provenance as leading '#' comment lines; structured
files carry it under the "provenance" key. Writers sort keys and fix the
float format, so identical inputs give byte-identical files.
"""

import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any

import pandas as pd

from config import OUTPUT_FORMATS
from src.errors import InputValidationError
from src.population.attributes import AttributeModel
from src.simulation.shelter import ScenarioConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def describe_config(config: ScenarioConfig) -> dict[str, Any]:
    """Plain-data view of a scenario for provenance headers."""
    mix = config.mix
    population = (
        {"attributes": asdict(mix), "grouping": config.grouping_mode}
        if isinstance(mix, AttributeModel)
        else {"labels": list(mix.labels), "rates": list(mix.rates)}
    )
    return {
        "name": config.name,
        "system": {"lambda": config.params.lam, "mu": config.params.mu, "theta": config.params.theta},
        "population": population,
        "beds": config.beds,
        "thresholds": list(config.policy.thresholds),
        "policy_source": config.policy.source,
        "horizon_days": config.horizon_days,
        "warmup_days": config.warmup_days,
        "initial_occupancy": config.initial_occupancy,
    }


def provenance(
    configs: list[ScenarioConfig],
    base_seed: int,
    replications: int,
    settings: dict[str, Any] | None = None,
    **extra: Any,
) -> dict[str, Any]:
    """
    Everything needed to rerun the experiment that produced a file.

    settings, when given, is the scenario file as loaded, defaults included.
    Analytic outputs pass no configs and carry no "scenarios" entry.
    """
    record = {"base_seed": int(base_seed), "replications": int(replications)}
    if configs:
        record["scenarios"] = [describe_config(config) for config in configs]
    if settings is not None:
        record["settings"] = settings
    record.update(extra)
    return record


def _check_format(fmt: str) -> None:
    if fmt not in OUTPUT_FORMATS:
        raise InputValidationError(f"output format must be one of {OUTPUT_FORMATS}, got {fmt!r}")


def write_table_csv(frame: pd.DataFrame, path: Path, meta: dict[str, Any], index: bool) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for key in sorted(meta):
            handle.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
        frame.to_csv(handle, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %s", path)
    return path


def _write_json(records: list[dict[str, Any]], path: Path, meta: dict[str, Any], key: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"provenance": meta, key: records}
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def _records(frame: pd.DataFrame) -> list[dict[str, Any]]:
    # Round-trip through JSON so numpy scalars become plain numbers
    return json.loads(frame.to_json(orient="records", double_precision=15))


def write_replication_csv(replications: pd.DataFrame, path: Path, meta: dict[str, Any]) -> Path:
    """One row per replication, replication number first."""
    return write_table_csv(replications, Path(path), meta, index=True)


def write_table_document(
    frame: pd.DataFrame, path: Path, meta: dict[str, Any], fmt: str = "csv", key: str = "rows"
) -> Path:
    """
    Frame as CSV, or as JSON records under `key`; the suffix follows the format.

    A named index becomes the first column in both formats.
    """
    _check_format(fmt)
    path = Path(path)
    if frame.index.name is not None:
        frame = frame.reset_index()
    if fmt == "csv":
        return write_table_csv(frame, path.with_suffix(".csv"), meta, index=False)
    return _write_json(_records(frame), path.with_suffix(".json"), meta, key)


def write_summary_document(
    summary: pd.DataFrame, path: Path, meta: dict[str, Any], fmt: str = "structured"
) -> Path:
    """Summary rows (scenario, metric, mean, sd, ci95, n) as CSV or JSON."""
    return write_table_document(summary, path, meta, fmt, key="summary")


def write_series(series: pd.DataFrame, path: Path, meta: dict[str, Any], fmt: str = "csv") -> Path:
    """Sweep series (parameter, value, metric, mean, sd, ci95, n) as CSV or JSON."""
    return write_table_document(series, path, meta, fmt, key="series")
