"""
Discrete-event simulation of the thresholded shelter queue

This module defines:
- ScenarioConfig, everything one replication needs
- RawReplicationMetrics, per-group and aggregate results of one replication
- run_replication, the event loop of the M/M/N/{K_j}+M shelter

Youth arrive as one Poisson stream and are assigned a group by sampling
their attribute profile. A waiting youth of group j may take a bed only
while more than K_j beds are idle. After every arrival and every service
completion the dispatcher scans the groups in priority order and admits the
longest-waiting eligible youth, repeating until nobody can be admitted.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from config import HIGH_RISK_GROUPS, HORIZON_DAYS, INITIAL_OCCUPANCY, WARMUP_DAYS
from src.errors import InputValidationError
from src.population.attributes import AttributeModel, ClassMix, class_arrival_rates, sample_group_indices
from src.queueing.erlang import SystemParams
from src.queueing.thresholds import ThresholdPolicy
from src.simulation.events import EventCalendar, EventKind
from src.simulation.trace import ADMISSION, TraceLog, TraceRecord
from src.simulation.youth import Outcome, Youth

logger = logging.getLogger(__name__)

# Order of the per-replication random streams spawned from (seed, replication)
_STREAMS = ("interarrivals", "profiles", "services", "patiences")

# Attribute profiles are drawn this many arrivals at a time
PROFILE_BLOCK = 256
# Waiting lists are rebuilt once their stale entries outnumber max(this, live entries)
COMPACT_MIN = 32


@dataclass(frozen=True)
class ScenarioConfig:
    """
    A shelter scenario ready to simulate.

    Args:
        params (SystemParams): Aggregate lambda, mu and theta
        mix (AttributeModel | ClassMix): Attribute model, or explicit group rates
        beds (int): Number of beds N
        policy (ThresholdPolicy): Entry thresholds, one per group
        horizon_days (float): End of the simulated window
        warmup_days (float): Start of the measured window
        initial_occupancy (int): Beds occupied at time 0
        name (str): Scenario label used in reports
        grouping_mode (str): Combination "table" or "rule-order" grouping
    """

    params: SystemParams
    mix: AttributeModel | ClassMix
    beds: int
    policy: ThresholdPolicy
    horizon_days: float = HORIZON_DAYS
    warmup_days: float = WARMUP_DAYS
    initial_occupancy: int = INITIAL_OCCUPANCY
    name: str = "scenario"
    grouping_mode: str = "table"

    def __post_init__(self):
        if isinstance(self.beds, bool) or int(self.beds) != self.beds or self.beds < 1:
            raise InputValidationError(f"number of beds must be a positive integer, got {self.beds!r}")
        if not (math.isfinite(self.horizon_days) and self.horizon_days > self.warmup_days >= 0):
            raise InputValidationError(
                f"need horizon > warmup >= 0, got horizon={self.horizon_days!r}, warmup={self.warmup_days!r}"
            )
        if not 0 <= self.initial_occupancy <= self.beds:
            raise InputValidationError(
                f"initial occupancy must lie in [0, {self.beds}], got {self.initial_occupancy!r}"
            )
        if len(self.policy.thresholds) != self.class_mix.n_groups:
            raise InputValidationError(
                f"policy has {len(self.policy.thresholds)} thresholds for {self.class_mix.n_groups} groups"
            )
        if isinstance(self.mix, ClassMix) and not math.isclose(
            self.mix.total_rate, self.params.lam, rel_tol=1e-9
        ):
            raise InputValidationError(
                f"group rates sum to {self.mix.total_rate:g} but lambda is {self.params.lam:g}"
            )

    @property
    def class_mix(self) -> ClassMix:
        if isinstance(self.mix, ClassMix):
            return self.mix
        return class_arrival_rates(self.params.lam, self.mix, self.grouping_mode)

    @property
    def window_days(self) -> float:
        return self.horizon_days - self.warmup_days

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with some fields changed."""
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return ScenarioConfig(**values)


@dataclass
class RawReplicationMetrics:
    """
    Results of one replication over (warmup, horizon].

    Counts are per group in priority order. Every youth arriving inside the
    window ends up served (admitted by the horizon), abandoned, or still
    waiting at the horizon. Waits include the time abandoning youth spent on
    the wait list; waits still running at the horizon are censored there.
    """

    labels: tuple[str, ...]
    arrivals: np.ndarray
    served: np.ndarray
    abandoned: np.ndarray
    waiting_at_horizon: np.ndarray
    total_wait: np.ndarray
    busy_bed_days: float
    beds: int
    window_days: float
    arrival_groups: np.ndarray = field(repr=False)
    arrival_waits: np.ndarray = field(repr=False)
    arrival_outcomes: np.ndarray = field(repr=False)

    @property
    def total_arrivals(self) -> int:
        return int(self.arrivals.sum())

    @property
    def total_abandoned(self) -> int:
        return int(self.abandoned.sum())

    @property
    def abandonment_proportion(self) -> float:
        return self.total_abandoned / self.total_arrivals if self.total_arrivals else 0.0

    @property
    def mean_wait_days(self) -> float:
        return float(self.total_wait.sum()) / self.total_arrivals if self.total_arrivals else 0.0

    @property
    def mean_utilization(self) -> float:
        return self.busy_bed_days / (self.beds * self.window_days)

    @property
    def high_risk_abandoned(self) -> int:
        return int(sum(n for label, n in zip(self.labels, self.abandoned) if label in HIGH_RISK_GROUPS))

    def group_abandonment(self) -> np.ndarray:
        return np.divide(
            self.abandoned, self.arrivals, out=np.zeros(len(self.labels)), where=self.arrivals > 0
        )

    def group_mean_wait(self) -> np.ndarray:
        return np.divide(
            self.total_wait, self.arrivals, out=np.zeros(len(self.labels)), where=self.arrivals > 0
        )

    def wait_exceedance(self, group: int, days: float) -> float:
        """Fraction of the group's arrivals that waited `days` or longer."""
        mine = self.arrival_waits[self.arrival_groups == group]
        return float(np.mean(mine >= days)) if mine.size else 0.0

    def as_record(self, wait_days: tuple[float, ...] = ()) -> dict[str, float]:
        """
        Flat row: aggregate metrics first, then one block per group.

        wait_days[j], when given, adds P{W_j >= wait_days[j]} as wait_exceedance_<label>.
        """
        row = {
            "utilization": self.mean_utilization,
            "arrivals": self.total_arrivals,
            "served": int(self.served.sum()),
            "abandoned": self.total_abandoned,
            "waiting_at_horizon": int(self.waiting_at_horizon.sum()),
            "abandonment": self.abandonment_proportion,
            "mean_wait": self.mean_wait_days,
            "high_risk_abandoned": self.high_risk_abandoned,
        }
        rates = self.group_abandonment()
        waits = self.group_mean_wait()
        for j, label in enumerate(self.labels):
            row[f"arrivals_{label}"] = int(self.arrivals[j])
            row[f"abandoned_{label}"] = int(self.abandoned[j])
            row[f"abandonment_{label}"] = float(rates[j])
            row[f"mean_wait_{label}"] = float(waits[j])
        for j, days in enumerate(wait_days):
            row[f"wait_exceedance_{self.labels[j]}"] = self.wait_exceedance(j, days)
        return row


def _random_streams(seed: int, replication: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence([int(seed), int(replication)]).spawn(len(_STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(_STREAMS, children)}


class _ShelterRun:
    """State of one replication; run() drives the event loop."""

    def __init__(self, config: ScenarioConfig, seed: int, replication: int, trace: bool):
        self.config = config
        self.mix = config.class_mix
        self.n_groups = self.mix.n_groups
        self.thresholds = config.policy.thresholds
        self.streams = _random_streams(seed, replication)
        self.calendar = EventCalendar()
        self.queues: list[deque[Youth]] = [deque() for _ in range(self.n_groups)]
        self.queue_lengths = [0] * self.n_groups
        self.stale = [0] * self.n_groups
        self.youth: dict[int, Youth] = {}
        self.window_arrivals: list[Youth] = []
        self.idle = config.beds
        self.busy_bed_days = 0.0
        self.clock = 0.0
        self.next_ident = 0
        self.records: list[TraceRecord] | None = [] if trace else None
        self._cumulative_shares = np.cumsum(self.mix.proportions)
        self._pending_groups: list[int] = []

    # Sampling

    def _draw_group(self) -> int:
        rng = self.streams["profiles"]
        if isinstance(self.config.mix, AttributeModel):
            if not self._pending_groups:
                block = sample_group_indices(self.config.mix, rng, PROFILE_BLOCK, self.config.grouping_mode)
                self._pending_groups = block.tolist()[::-1]
            return self._pending_groups.pop()
        draw = rng.random() * self._cumulative_shares[-1]
        return int(np.searchsorted(self._cumulative_shares, draw, side="right"))

    def _draw_service(self) -> float:
        return self.streams["services"].standard_exponential() / self.config.params.mu

    def _draw_patience(self) -> float:
        draw = self.streams["patiences"].standard_exponential()
        theta = self.config.params.theta
        return draw / theta if theta > 0 else math.inf

    def _schedule_arrival(self) -> None:
        gap = self.streams["interarrivals"].standard_exponential() / self.config.params.lam
        self.calendar.schedule(self.clock + gap, EventKind.ARRIVAL, self.next_ident)

    # Bookkeeping

    def _advance(self, time: float) -> None:
        # Busy bed-days accrue only inside the measured window
        start = max(self.clock, self.config.warmup_days)
        end = min(time, self.config.horizon_days)
        if end > start:
            self.busy_bed_days += (self.config.beds - self.idle) * (end - start)
        self.clock = time

    def _record(self, kind: str, subject: int, group: int, idle_before: int) -> None:
        if self.records is not None:
            self.records.append(
                TraceRecord(self.clock, kind, subject, group, idle_before, self.idle, tuple(self.queue_lengths))
            )

    def _admit(self, youth: Youth) -> None:
        idle_before = self.idle
        self.idle -= 1
        completion = youth.admit(self.clock)
        self.calendar.schedule(completion, EventKind.SERVICE_COMPLETION, youth.ident)
        self._record(ADMISSION, youth.ident, youth.group, idle_before)

    def _head(self, group: int) -> Youth | None:
        queue = self.queues[group]
        while queue and not queue[0].is_waiting:
            queue.popleft()
            self.stale[group] -= 1
        return queue[0] if queue else None

    def _compact(self, group: int) -> None:
        """Drop abandoned entries once they dominate the waiting list; order is kept."""
        if self.stale[group] > max(COMPACT_MIN, self.queue_lengths[group]):
            self.queues[group] = deque(y for y in self.queues[group] if y.is_waiting)
            self.stale[group] = 0

    def _dispatch(self) -> None:
        """Admit eligible youth by priority, longest waiting first, until none remain."""
        admitted = True
        while admitted and self.idle > 0:
            admitted = False
            for group in range(self.n_groups):
                if self.queue_lengths[group] == 0 or self.idle <= self.thresholds[group]:
                    continue
                youth = self._head(group)
                self.queues[group].popleft()
                self.queue_lengths[group] -= 1
                self._compact(group)
                self._admit(youth)
                admitted = True
                break

    # Event handlers

    def _on_arrival(self, ident: int) -> None:
        youth = Youth(
            ident=ident,
            group=self._draw_group(),
            arrival=self.clock,
            service_days=self._draw_service(),
            patience_days=self._draw_patience(),
        )
        self.next_ident += 1
        self.youth[ident] = youth
        if self.clock > self.config.warmup_days:
            self.window_arrivals.append(youth)
        self.queues[youth.group].append(youth)
        self.queue_lengths[youth.group] += 1
        self._record(EventKind.ARRIVAL.label, ident, youth.group, self.idle)
        self._dispatch()
        if youth.is_waiting and not youth.patient_forever:
            self.calendar.schedule(youth.deadline, EventKind.PATIENCE_EXPIRY, ident)
        self._schedule_arrival()

    def _on_completion(self, ident: int) -> None:
        youth = self.youth.pop(ident)
        idle_before = self.idle
        self.idle += 1
        self._record(EventKind.SERVICE_COMPLETION.label, ident, youth.group, idle_before)
        self._dispatch()

    def _on_expiry(self, ident: int) -> None:
        youth = self.youth.get(ident)
        if youth is None or not youth.is_waiting:
            return
        youth.abandon(self.clock)
        self.youth.pop(ident)
        self.queue_lengths[youth.group] -= 1
        self.stale[youth.group] += 1
        self._compact(youth.group)
        self._record(EventKind.PATIENCE_EXPIRY.label, ident, youth.group, self.idle)

    def _seed_initial_occupancy(self) -> None:
        for _ in range(self.config.initial_occupancy):
            occupant = Youth(self.next_ident, -1, 0.0, self._draw_service(), math.inf)
            self.next_ident += 1
            self.youth[occupant.ident] = occupant
            self.idle -= 1
            self.calendar.schedule(occupant.admit(0.0), EventKind.SERVICE_COMPLETION, occupant.ident)

    def run(self) -> tuple[RawReplicationMetrics, TraceLog | None]:
        self._seed_initial_occupancy()
        self._schedule_arrival()
        handlers = {
            EventKind.ARRIVAL: self._on_arrival,
            EventKind.SERVICE_COMPLETION: self._on_completion,
            EventKind.PATIENCE_EXPIRY: self._on_expiry,
        }
        horizon = self.config.horizon_days
        while len(self.calendar) and self.calendar.next_time() <= horizon:
            event = self.calendar.pop()
            self._advance(event.time)
            handlers[event.kind](event.subject)
        self._advance(horizon)
        trace = None
        if self.records is not None:
            trace = TraceLog(self.config.beds, self.thresholds, self.records)
        return self._collect(), trace

    def _collect(self) -> RawReplicationMetrics:
        size = self.n_groups
        arrivals = np.zeros(size, dtype=np.int64)
        served = np.zeros(size, dtype=np.int64)
        abandoned = np.zeros(size, dtype=np.int64)
        waiting = np.zeros(size, dtype=np.int64)
        total_wait = np.zeros(size)
        horizon = self.config.horizon_days
        outcome_codes = {Outcome.SERVED: 0, Outcome.ABANDONED: 1, Outcome.WAITING: 2}

        groups = np.array([y.group for y in self.window_arrivals], dtype=np.int64)
        waits = np.array([y.wait_until(horizon) for y in self.window_arrivals], dtype=float)
        outcomes = np.array([outcome_codes[y.outcome] for y in self.window_arrivals], dtype=np.int64)
        if groups.size:
            np.add.at(arrivals, groups, 1)
            np.add.at(served, groups, outcomes == 0)
            np.add.at(abandoned, groups, outcomes == 1)
            np.add.at(waiting, groups, outcomes == 2)
            np.add.at(total_wait, groups, waits)

        return RawReplicationMetrics(
            labels=tuple(self.mix.labels),
            arrivals=arrivals,
            served=served,
            abandoned=abandoned,
            waiting_at_horizon=waiting,
            total_wait=total_wait,
            busy_bed_days=self.busy_bed_days,
            beds=self.config.beds,
            window_days=self.config.window_days,
            arrival_groups=groups,
            arrival_waits=waits,
            arrival_outcomes=outcomes,
        )


def run_replication(
    config: ScenarioConfig, seed: int, replication: int = 0, trace: bool = False
) -> RawReplicationMetrics | tuple[RawReplicationMetrics, TraceLog]:
    """
    Simulate one replication of the shelter.

    Random streams for interarrival times, profiles, service times and
    patience times are spawned from (seed, replication), so a replication
    sees the same draws whatever the scenario around it.

    Args:
        config (ScenarioConfig): Scenario to simulate
        seed (int): Base seed of the experiment
        replication (int): Replication index on the seed ladder
        trace (bool): Also return the event trace

    Returns:
        RawReplicationMetrics, or (metrics, TraceLog) when trace is set
    """
    if replication < 0:
        raise InputValidationError(f"replication index must be >= 0, got {replication!r}")
    metrics, trace_log = _ShelterRun(config, seed, replication, trace).run()
    logger.debug(
        "%s replication %d: %d arrivals, %.2f%% abandoned, utilization %.3f",
        config.name,
        replication,
        metrics.total_arrivals,
        100 * metrics.abandonment_proportion,
        metrics.mean_utilization,
    )
    if trace:
        return metrics, trace_log
    return metrics
