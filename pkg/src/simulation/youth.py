"""
Youth entity for the shelter simulation

This module defines the Youth class which tracks:
- Vulnerability group, arrival time and sampled service and patience times
- The youth's state as it moves from the wait list to a bed or away
"""

import math
from dataclasses import dataclass
from enum import Enum


class Outcome(str, Enum):
    """Where a youth is when the simulation window closes."""

    WAITING = "waiting"
    SERVED = "served"
    ABANDONED = "abandoned"


@dataclass(slots=True)
class Youth:
    """
    One arriving youth.

    Args:
        ident (int): Subject identifier, unique within a replication
        group (int): Index of the vulnerability group, -1 for initial occupants
        arrival (float): Arrival time in days
        service_days (float): Length of stay once admitted
        patience_days (float): Time the youth will wait before leaving
    """

    ident: int
    group: int
    arrival: float
    service_days: float
    patience_days: float
    outcome: Outcome = Outcome.WAITING
    admitted_at: float | None = None
    left_at: float | None = None

    @property
    def deadline(self) -> float:
        """Instant the youth abandons if still waiting."""
        return self.arrival + self.patience_days

    @property
    def is_waiting(self) -> bool:
        return self.outcome is Outcome.WAITING

    def admit(self, now: float) -> float:
        """Start service now and return the completion time."""
        self.outcome = Outcome.SERVED
        self.admitted_at = now
        return now + self.service_days

    def abandon(self, now: float) -> None:
        self.outcome = Outcome.ABANDONED
        self.left_at = now

    def wait_until(self, horizon: float) -> float:
        """Time spent on the wait list, censored at the horizon."""
        if self.admitted_at is not None:
            return self.admitted_at - self.arrival
        if self.left_at is not None:
            return self.left_at - self.arrival
        return max(0.0, horizon - self.arrival)

    @property
    def patient_forever(self) -> bool:
        return math.isinf(self.patience_days)
