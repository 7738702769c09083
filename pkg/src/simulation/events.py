"""
Event calendar for the shelter simulation

This module defines:
- EventKind, the three event types with their tie-breaking rank
- SimEvent, one scheduled event
- EventCalendar, a heap that releases events in time order

Simultaneous events are released service completions first, then patience
expiries, then arrivals, and finally by subject identifier. A freed bed is
therefore offered to the wait list before anyone waiting at that instant
abandons.
"""

import heapq
from enum import IntEnum
from typing import NamedTuple

from src.errors import InputValidationError


class EventKind(IntEnum):
    SERVICE_COMPLETION = 0
    PATIENCE_EXPIRY = 1
    ARRIVAL = 2

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    EventKind.SERVICE_COMPLETION: "serviceCompletion",
    EventKind.PATIENCE_EXPIRY: "patienceExpiry",
    EventKind.ARRIVAL: "arrival",
}


class SimEvent(NamedTuple):
    """A scheduled event; tuple order is the release order."""

    time: float
    kind: EventKind
    subject: int


class EventCalendar:
    """Pending events ordered by (time, kind, subject)."""

    def __init__(self):
        self._heap: list[SimEvent] = []

    def schedule(self, time: float, kind: EventKind, subject: int) -> None:
        if not time >= 0:
            raise InputValidationError(f"events need a nonnegative time, got {time!r}")
        heapq.heappush(self._heap, SimEvent(time, kind, subject))

    def next_time(self) -> float | None:
        return self._heap[0].time if self._heap else None

    def pop(self) -> SimEvent:
        return heapq.heappop(self._heap)

    def __len__(self) -> int:
        return len(self._heap)
