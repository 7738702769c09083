"""
Event traces and the threshold-admission verifier

This module defines:
- TraceRecord, one line of a replication trace
- TraceLog, the records of one replication together with N and the thresholds
- Writing and reading traces as delimited text
- verify_threshold_trace, which replays a trace and checks the admission rule

Every bed assignment appears as its own "admission" record right after the
arrival or service completion that triggered it. Queue lengths are the
per-group wait-list sizes after the recorded event.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import pandas as pd

from src.errors import InputValidationError

logger = logging.getLogger(__name__)

ADMISSION = "admission"
TRACE_COLUMNS = ["time", "kind", "subject", "group", "idle_before", "idle_after", "queue_lengths"]
_IDLE_STEP = {"arrival": 0, "patienceExpiry": 0, "serviceCompletion": 1, ADMISSION: -1}


@dataclass(frozen=True)
class TraceRecord:
    time: float
    kind: str
    subject: int
    group: int
    idle_before: int
    idle_after: int
    queue_lengths: tuple[int, ...]


@dataclass
class TraceLog:
    """Trace of one replication; the header fields make it self-contained."""

    beds: int
    thresholds: tuple[int, ...]
    records: list[TraceRecord]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "time": r.time,
                "kind": r.kind,
                "subject": r.subject,
                "group": r.group,
                "idle_before": r.idle_before,
                "idle_after": r.idle_after,
                "queue_lengths": ";".join(str(n) for n in r.queue_lengths),
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)


@dataclass(frozen=True)
class TraceVerdict:
    """Outcome of a trace check; falsy when a violation was found."""

    ok: bool
    violation: TraceRecord | None = None
    index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def write_trace(trace: TraceLog, path: Path, meta: dict[str, Any] | None = None) -> Path:
    """
    Write the trace with a '# beds=... thresholds=...' header line.

    meta, when given, follows the header as '# key: json' provenance lines.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# beds={trace.beds} thresholds={';'.join(map(str, trace.thresholds))}\n")
        for key in sorted(meta or {}):
            handle.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
        trace.to_frame().to_csv(handle, index=False, float_format="%.10g", lineterminator="\n")
    return path


def read_trace(path: Path) -> TraceLog:
    """Load a trace written by write_trace."""
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        header = handle.readline().lstrip("#").split()
    try:
        fields = dict(item.split("=", 1) for item in header)
        beds = int(fields["beds"])
        thresholds = tuple(int(k) for k in fields["thresholds"].split(";"))
    except (KeyError, ValueError) as exc:
        raise InputValidationError(f"{path} has no valid trace header") from exc

    frame = pd.read_csv(path, comment="#", dtype={"queue_lengths": str, "kind": str})
    records = [
        TraceRecord(
            time=float(row.time),
            kind=row.kind,
            subject=int(row.subject),
            group=int(row.group),
            idle_before=int(row.idle_before),
            idle_after=int(row.idle_after),
            queue_lengths=tuple(int(n) for n in str(row.queue_lengths).split(";")),
        )
        for row in frame.itertuples(index=False)
    ]
    return TraceLog(beds, thresholds, records)


def _unserved_eligible(record: TraceRecord, thresholds: Sequence[int]) -> int | None:
    """First group with someone waiting while more than its threshold of beds idle."""
    for group, (waiting, k) in enumerate(zip(record.queue_lengths, thresholds)):
        if waiting > 0 and record.idle_after > k:
            return group
    return None


def verify_threshold_trace(trace: TraceLog) -> TraceVerdict:
    """
    Check every admission against the thresholds and the priority order.

    An admission of group j is valid when more than K_j beds were idle just
    before it and no higher-priority group had anyone waiting. After the
    admissions triggered by an event, nobody may be left waiting while more
    than their group's threshold of beds is idle. Idle counts must chain from
    record to record and stay within [0, N].

    Args:
        trace (TraceLog): Trace of one replication

    Returns:
        TraceVerdict: Truthy when the trace is consistent, otherwise the
        first violating record and the broken condition
    """
    thresholds = trace.thresholds

    def fail(index: int, reason: str) -> TraceVerdict:
        record = trace.records[index]
        logger.debug("trace violation at record %d (t=%.6f): %s", index, record.time, reason)
        return TraceVerdict(False, record, index, reason)

    previous_idle = None
    for index, record in enumerate(trace.records):
        if record.kind not in _IDLE_STEP:
            return fail(index, f"unknown event kind {record.kind!r}")
        if len(record.queue_lengths) != len(thresholds):
            return fail(index, "queue lengths do not match the number of groups")
        if previous_idle is not None and record.idle_before != previous_idle:
            return fail(index, f"idle count jumps from {previous_idle} to {record.idle_before}")
        if record.idle_after - record.idle_before != _IDLE_STEP[record.kind]:
            return fail(index, f"{record.kind} changes idle beds by {record.idle_after - record.idle_before}")
        if not 0 <= record.idle_after <= trace.beds:
            return fail(index, f"idle count {record.idle_after} outside [0, {trace.beds}]")
        previous_idle = record.idle_after

        if record.kind == ADMISSION:
            group = record.group
            if group < 0 or group >= len(thresholds):
                return fail(index, f"admission of unknown group {group}")
            if not record.idle_before > thresholds[group]:
                return fail(
                    index,
                    f"group {group} admitted with {record.idle_before} idle beds, K={thresholds[group]}",
                )
            higher = [g for g in range(group) if record.queue_lengths[g] > 0]
            if higher:
                return fail(index, f"group {higher[0]} was waiting and passed over for group {group}")

        # The last record of each event group must leave nobody eligible waiting
        is_last = index + 1 == len(trace.records) or trace.records[index + 1].kind != ADMISSION
        if is_last:
            starved = _unserved_eligible(record, thresholds)
            if starved is not None:
                return fail(
                    index,
                    f"group {starved} left waiting with {record.idle_after} idle beds, "
                    f"K={thresholds[starved]}",
                )
    return TraceVerdict(True)
