"""
Idle-bed priority thresholds

This module defines:
- CumulativeLoads, the partial loads rho_j, cumulative loads sigma_j and
  the omega-hat factors of adjacent group pairs
- ThresholdPolicy, the entry thresholds K_j (group j starts service only
  while more than K_j beds are idle)
- ClassDelayProfile, the per-group delay probabilities implied by a policy
- The analytic threshold recursions for wait caps and abandonment caps

The recursions run from the lowest-priority group upward. Whenever a
cumulative load reaches 1 - eps it is clamped to 1 - eps and the result is
flagged as analytically degenerate; simulation calibration is the better
tool in that case.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from config import ABANDON_CAP_DAYS, CEIL_TOLERANCE, DEGENERACY_EPS
from src.errors import DegenerateLoadError, InputValidationError
from src.queueing.staffing import WaitCap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CumulativeLoads:
    """
    Partial and cumulative loads of the groups in priority order.

    omega_hat maps the pair (j, j+1) of 0-based group indices to
    [N mu (1 - sigma_{j+1}) (1 - sigma_j)]^-1, or to None when either load
    is degenerate (>= 1 - eps).
    """

    beds: int
    mu: float
    rho: tuple[float, ...]
    sigma: tuple[float, ...]
    omega_hat: dict[tuple[int, int], float | None]
    eps: float = DEGENERACY_EPS

    @property
    def n_groups(self) -> int:
        return len(self.rho)

    def is_degenerate(self, j: int) -> bool:
        return self.sigma[j] >= 1.0 - self.eps

    def clamped_sigma(self, j: int) -> float:
        """sigma_j, clamped to 1 - eps when degenerate."""
        return min(self.sigma[j], 1.0 - self.eps)

    def clamped_omega_hat(self, j: int) -> float:
        """omega-hat of the pair (j, j+1) computed from clamped loads."""
        return 1.0 / (
            self.beds * self.mu * (1.0 - self.clamped_sigma(j + 1)) * (1.0 - self.clamped_sigma(j))
        )


@dataclass(frozen=True)
class ThresholdPolicy:
    """
    Entry thresholds K_1 <= ... <= K_|J| in priority order.

    Args:
        thresholds (tuple): One nonnegative integer per group, K_1 = 0
        source (str): "explicit", "analytic" or "calibrated"
        degenerate (bool): True when a clamped load was needed
    """

    thresholds: tuple[int, ...]
    source: str = "explicit"
    degenerate: bool = False

    def __post_init__(self):
        values = tuple(int(k) for k in self.thresholds)
        if not values:
            raise InputValidationError("a threshold policy needs at least one group")
        if any(k < 0 for k in values):
            raise InputValidationError(f"thresholds must be nonnegative, got {values}")
        if values[0] != 0:
            raise InputValidationError(f"the top-priority group must have K = 0, got {values[0]}")
        if any(b < a for a, b in zip(values, values[1:])):
            raise InputValidationError(f"thresholds must be nondecreasing, got {values}")
        object.__setattr__(self, "thresholds", values)

    @classmethod
    def from_increments(cls, increments: Sequence[int], **kwargs) -> "ThresholdPolicy":
        """Build K from K_{j+1} - K_j, anchoring K_1 = 0."""
        thresholds = [0]
        for step in increments:
            thresholds.append(thresholds[-1] + int(step))
        return cls(tuple(thresholds), **kwargs)

    @classmethod
    def zeros(cls, n_groups: int) -> "ThresholdPolicy":
        return cls((0,) * n_groups)

    @property
    def increments(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.thresholds, self.thresholds[1:]))

    def warn_if_starving(self, beds: int) -> None:
        """Log groups whose threshold leaves them no idle bed to take."""
        for j, k in enumerate(self.thresholds):
            if k >= beds:
                logger.warning("group %d has K=%d >= N=%d and is never admitted", j + 1, k, beds)


@dataclass(frozen=True)
class ClassDelayProfile:
    """Per-group delay probabilities P{W_j > 0}, highest priority first."""

    p_wait_by_class: tuple[float, ...] = field(default_factory=tuple)


def cumulative_loads(
    class_rates: Sequence[float], beds: int, mu: float, eps: float = DEGENERACY_EPS
) -> CumulativeLoads:
    """
    Loads rho_j = lambda_j / (N mu), their running sums sigma_j and omega-hat.

    Args:
        class_rates (Sequence[float]): lambda_j in priority order, all > 0
        beds (int): Number of beds N
        mu (float): Service rate per bed

    Returns:
        CumulativeLoads: Loads with degenerate pairs marked by None
    """
    if beds < 1:
        raise InputValidationError(f"number of beds must be >= 1, got {beds!r}")
    if not mu > 0:
        raise InputValidationError(f"mu must be > 0, got {mu!r}")
    if not class_rates or any(not rate > 0 for rate in class_rates):
        raise InputValidationError(f"group arrival rates must all be > 0, got {list(class_rates)}")

    capacity = beds * mu
    rho = tuple(rate / capacity for rate in class_rates)
    sigma = tuple(itertools.accumulate(rho))
    omega_hat: dict[tuple[int, int], float | None] = {}
    for j in range(len(rho) - 1):
        if sigma[j + 1] >= 1.0 - eps or sigma[j] >= 1.0 - eps:
            omega_hat[(j, j + 1)] = None
        else:
            omega_hat[(j, j + 1)] = 1.0 / (capacity * (1.0 - sigma[j + 1]) * (1.0 - sigma[j]))
    return CumulativeLoads(beds, mu, rho, sigma, omega_hat, eps)


def _threshold_recursion(
    loads: CumulativeLoads,
    numerators: Sequence[float],
    p_wait_lowest: float,
    allow_degenerate: bool,
    source: str = "analytic",
) -> ThresholdPolicy:
    n_groups = loads.n_groups
    if len(numerators) != n_groups - 1:
        raise InputValidationError(
            f"{len(numerators)} caps given for {n_groups} groups; expected {n_groups - 1}"
        )
    if not 0 <= p_wait_lowest <= 1:
        raise InputValidationError(f"delay probability must lie in [0, 1], got {p_wait_lowest!r}")

    increments = [0] * (n_groups - 1)
    degenerate = False
    p_wait_next = p_wait_lowest
    for j in range(n_groups - 2, -1, -1):
        if loads.omega_hat[(j, j + 1)] is None:
            if not allow_degenerate:
                raise DegenerateLoadError(
                    f"degenerate-load: sigma_{j + 2}={loads.sigma[j + 1]:.4f} reaches 1 - eps"
                )
            degenerate = True
        omega = loads.clamped_omega_hat(j)
        sigma_j = loads.clamped_sigma(j)
        if p_wait_next <= 0:
            # Nobody of the lower group waits, so the cap is slack
            step = 0
        else:
            ratio = math.log(numerators[j] / (p_wait_next * omega)) / math.log(sigma_j)
            step = max(0, math.ceil(ratio - CEIL_TOLERANCE))
        increments[j] = step
        p_wait_next *= sigma_j**step

    if degenerate:
        logger.warning(
            "thresholds are analytically-degenerate: loads clamped to 1 - %g; "
            "calibrate by simulation instead",
            loads.eps,
        )
    policy = ThresholdPolicy.from_increments(increments, source=source, degenerate=degenerate)
    policy.warn_if_starving(loads.beds)
    return policy


def thresholds_for_wait_caps(
    loads: CumulativeLoads,
    caps: Sequence[WaitCap],
    p_wait_lowest: float,
    numerator: str = "wait",
    abandon_caps: Sequence[float] = (),
    allow_degenerate: bool = True,
) -> ThresholdPolicy:
    """
    Thresholds keeping P{W_j >= T_j} <= x_j for every group but the last.

    K_{j+1} - K_j = ceil(ln(x_j T_j / [P{W_{j+1} > 0} omega-hat]) / ln sigma_j) v 0,
    with P{W_j > 0} = P{W_{j+1} > 0} sigma_j^(K_{j+1} - K_j) and the lowest
    group's delay probability taken from the Erlang-A model at N.

    Args:
        loads (CumulativeLoads): Loads at the staffed N
        caps (Sequence[WaitCap]): (x_j, T_j) for groups 1..|J|-1
        p_wait_lowest (float): Erlang-A P{W > 0} at N
        numerator (str): "wait" for x_j T_j, "abandon" for alpha_j T_j
        abandon_caps (Sequence[float]): alpha_j, needed when numerator is "abandon"
        allow_degenerate (bool): Clamp degenerate loads instead of failing

    Returns:
        ThresholdPolicy: Cumulative thresholds with K_1 = 0
    """
    if numerator == "wait":
        numerators = [cap.fraction * cap.days for cap in caps]
    elif numerator == "abandon":
        if len(abandon_caps) != len(caps):
            raise InputValidationError("the abandon numerator needs one alpha_j per wait cap")
        numerators = [alpha_j * cap.days for alpha_j, cap in zip(abandon_caps, caps)]
    else:
        raise InputValidationError(f"numerator must be 'wait' or 'abandon', got {numerator!r}")
    return _threshold_recursion(loads, numerators, p_wait_lowest, allow_degenerate)


def thresholds_for_abandon_caps(
    loads: CumulativeLoads,
    caps: Sequence[float],
    theta: float,
    p_wait_lowest: float,
    cap_days: float = ABANDON_CAP_DAYS,
    allow_degenerate: bool = True,
) -> ThresholdPolicy:
    """
    Thresholds keeping P_j{Ab} <= alpha_j, through P{Ab} = E[W] theta.

    The numerator of the wait-cap recursion becomes alpha_j T_j / theta;
    T_j defaults to one day because abandonment caps carry no wait limit.
    """
    if not theta > 0:
        raise InputValidationError("abandonment-cap thresholds need theta > 0")
    numerators = [alpha_j * cap_days / theta for alpha_j in caps]
    return _threshold_recursion(loads, numerators, p_wait_lowest, allow_degenerate)


def class_delay_profile(
    policy: ThresholdPolicy,
    loads: CumulativeLoads,
    p_wait_lowest: float,
    allow_degenerate: bool = True,
) -> ClassDelayProfile:
    """Delay probabilities P{W_j > 0} = P{W_{j+1} > 0} sigma_j^(K_{j+1} - K_j)."""
    if len(policy.thresholds) != loads.n_groups:
        raise InputValidationError("policy and loads describe different numbers of groups")
    profile = [0.0] * loads.n_groups
    profile[-1] = p_wait_lowest
    for j in range(loads.n_groups - 2, -1, -1):
        if loads.is_degenerate(j) and not allow_degenerate:
            raise DegenerateLoadError(f"degenerate-load: sigma_{j + 1}={loads.sigma[j]:.4f}")
        profile[j] = profile[j + 1] * loads.clamped_sigma(j) ** policy.increments[j]
    return ClassDelayProfile(tuple(profile))
