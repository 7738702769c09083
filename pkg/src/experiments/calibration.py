"""
Threshold calibration by simulation

This module defines calibrate_thresholds_by_simulation, used when the
analytic threshold recursion does not apply (a cumulative load at or above
one). Boundaries are settled from the lowest-priority group upward; at each
boundary a binary search finds the smallest increment for which every
higher-priority cap holds as a mean over the replications.
"""

import logging

from config import BASE_SEED, CALIBRATION_REPLICATIONS
from src.errors import InfeasibleError, InputValidationError
from src.experiments.replications import ReplicationSummary, run_replications
from src.queueing.staffing import QosTargets
from src.queueing.thresholds import ThresholdPolicy
from src.simulation.shelter import ScenarioConfig

logger = logging.getLogger(__name__)


class _CapChecker:
    """Evaluates caps for a policy, caching one simulation batch per policy."""

    def __init__(self, config: ScenarioConfig, caps: QosTargets, reps: int, base_seed: int, workers: int):
        self.config = config
        self.caps = caps
        self.reps = reps
        self.base_seed = base_seed
        self.workers = workers
        self.labels = config.class_mix.labels
        self.wait_days = tuple(cap.days for cap in caps.wait_caps)
        self._summaries: dict[tuple[int, ...], ReplicationSummary] = {}

    def _summary(self, policy: ThresholdPolicy) -> ReplicationSummary:
        key = policy.thresholds
        if key not in self._summaries:
            logger.debug("calibration trial K=%s", key)
            trial = self.config.replace(policy=policy, name=f"{self.config.name}[K={key}]")
            self._summaries[key] = run_replications(
                trial, self.reps, self.base_seed, self.workers, wait_days=self.wait_days
            )
        return self._summaries[key]

    @property
    def trials(self) -> int:
        return len(self._summaries)

    def holds(self, policy: ThresholdPolicy, top_groups: int) -> bool:
        """True when the caps of groups 0..top_groups-1 and the high-risk cap hold."""
        frame = self._summary(policy).replications
        for j in range(top_groups):
            if j < len(self.caps.abandon_caps):
                if frame[f"abandonment_{self.labels[j]}"].mean() > self.caps.abandon_caps[j]:
                    return False
            if j < len(self.caps.wait_caps):
                if frame[f"wait_exceedance_{self.labels[j]}"].mean() > self.caps.wait_caps[j].fraction:
                    return False
        cap = self.caps.high_risk_abandoned_cap
        return cap is None or frame["high_risk_abandoned"].mean() <= cap


def calibrate_thresholds_by_simulation(
    config: ScenarioConfig,
    caps: QosTargets,
    max_k: int,
    reps: int = CALIBRATION_REPLICATIONS,
    base_seed: int = BASE_SEED,
    workers: int = 1,
) -> ThresholdPolicy:
    """
    Smallest thresholds whose simulated per-group caps hold.

    Args:
        config (ScenarioConfig): Scenario; its own policy is ignored
        caps (QosTargets): Per-group wait or abandonment caps, optional high-risk cap
        max_k (int): Largest threshold allowed, at most N
        reps (int): Replications per trial
        base_seed (int): Root of the seed ladder shared by every trial

    Returns:
        ThresholdPolicy: Calibrated cumulative thresholds

    Raises:
        InfeasibleError: The caps fail even with the lowest group at max_k
    """
    n_groups = config.class_mix.n_groups
    caps.check_groups(n_groups)
    if not 0 <= max_k <= config.beds:
        raise InputValidationError(f"max K must lie in [0, N={config.beds}], got {max_k!r}")
    if not (caps.wait_caps or caps.abandon_caps or caps.high_risk_abandoned_cap is not None):
        raise InputValidationError("calibration needs per-group caps or a high-risk cap")

    checker = _CapChecker(config, caps, reps, base_seed, workers)
    increments = [0] * (n_groups - 1)

    def with_step(boundary: int, step: int) -> ThresholdPolicy:
        trial = list(increments)
        trial[boundary] = step
        return ThresholdPolicy.from_increments(trial, source="calibrated")

    for boundary in range(n_groups - 2, -1, -1):
        top_groups = boundary + 1
        if checker.holds(with_step(boundary, 0), top_groups):
            continue
        room = max_k - sum(increments)
        if not checker.holds(with_step(boundary, room), top_groups):
            raise InfeasibleError(
                f"infeasible-at-maxK: caps of groups {list(checker.labels[:top_groups])} "
                f"unmet with K={with_step(boundary, room).thresholds}"
            )
        low, high = 0, room
        while high - low > 1:
            middle = (low + high) // 2
            if checker.holds(with_step(boundary, middle), top_groups):
                high = middle
            else:
                low = middle
        increments[boundary] = high
        logger.debug("boundary %d/%d settled at increment %d", boundary + 1, boundary + 2, high)

    policy = ThresholdPolicy.from_increments(increments, source="calibrated")
    logger.info("calibrated thresholds %s after %d trials", policy.thresholds, checker.trials)
    return policy
