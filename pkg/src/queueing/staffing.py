"""
Bed staffing for the shelter queue

This module defines:
- QosTargets, the global and per-group quality-of-service caps
- StaffingResult, a recommended number of beds with its provenance
- The quality-driven (QD), efficiency-driven (ED) and square-root (QED)
  staffing formulas, including the beta* equation behind QED staffing
- Exact searches for the fewest beds meeting P{Ab} <= alpha or E[W] <= M

The exact searches are the authoritative answer to both bed models; the
regime formulas are kept as the approximations they are.
"""

import logging
import math
from fractions import Fraction
from dataclasses import dataclass
from enum import Enum

import pandas as pd
from scipy.optimize import brentq

from config import (
    ABANDONMENT_TARGET,
    BETA_BRACKET,
    BETA_BRACKET_LIMIT,
    BETA_XTOL,
    STAFFING_SEARCH_LIMIT,
)
from src.errors import InputValidationError, NoRootInBracketError, NumericalInconsistencyError
from src.queueing.erlang import ErlangAMetrics, SystemParams, erlang_a_metrics
from src.queueing.special import normal_hazard

logger = logging.getLogger(__name__)

_RESIDUAL_TOLERANCE = 1e-9


class Regime(str, Enum):
    """How a bed count was obtained."""

    QD = "QD"
    ED = "ED"
    QED = "QED"
    EXACT_AB = "EXACT_AB"
    EXACT_WAIT = "EXACT_WAIT"


@dataclass(frozen=True)
class WaitCap:
    """No more than `fraction` of a group may wait `days` or longer."""

    fraction: float
    days: float


@dataclass(frozen=True)
class QosTargets:
    """
    Quality-of-service caps, per-group lists ordered by priority.

    Args:
        alpha_global (float): Cap on the aggregate P{Ab}
        max_mean_wait (float): Cap on the aggregate E[W] in days
        wait_caps (tuple): WaitCap per group, lowest-priority group excluded
        abandon_caps (tuple): alpha_j per group, lowest-priority group excluded
        high_risk_abandoned_cap (float): Optional cap on high-risk abandoners per horizon
    """

    alpha_global: float
    max_mean_wait: float
    wait_caps: tuple[WaitCap, ...] = ()
    abandon_caps: tuple[float, ...] = ()
    high_risk_abandoned_cap: float | None = None

    def __post_init__(self):
        _check_probability("alpha", self.alpha_global)
        if not self.max_mean_wait > 0:
            raise InputValidationError(f"maximum mean wait must be > 0 days, got {self.max_mean_wait!r}")
        for cap in self.wait_caps:
            _check_probability("wait cap fraction", cap.fraction)
            if not cap.days > 0:
                raise InputValidationError(f"wait cap days must be > 0, got {cap.days!r}")
        for alpha_j in self.abandon_caps:
            _check_probability("per-group abandonment cap", alpha_j)
        if self.high_risk_abandoned_cap is not None and self.high_risk_abandoned_cap < 0:
            raise InputValidationError("high-risk abandoner cap must be >= 0")

    def check_groups(self, n_groups: int) -> None:
        """Per-group caps must cover every group except the lowest-priority one."""
        for name, caps in (("wait", self.wait_caps), ("abandonment", self.abandon_caps)):
            if caps and len(caps) != n_groups - 1:
                raise InputValidationError(
                    f"{len(caps)} {name} caps given for {n_groups} groups; expected {n_groups - 1}"
                )


@dataclass(frozen=True)
class StaffingResult:
    """
    A recommended number of beds.

    Exact searches also carry the metrics at N and at N - 1, which certify
    that N is the smallest feasible count.
    """

    regime: Regime
    beds: int
    offered_load: float
    beta_star: float | None = None
    gamma_used: float | None = None
    metrics: ErlangAMetrics | None = None
    previous_metrics: ErlangAMetrics | None = None
    note: str | None = None

    def __post_init__(self):
        if self.beds < 1:
            raise InputValidationError(f"staffing produced {self.beds} beds")
        if self.regime is Regime.QED and self.beta_star is None:
            raise InputValidationError("QED staffing must record beta*")


def _check_probability(name: str, value: float) -> None:
    if not 0 < value < 1:
        raise InputValidationError(f"{name} must lie in (0, 1), got {value!r}")


def _decimal(value: float) -> Fraction:
    # The shortest repr is the number the user typed: 0.016 is 2/125, not its binary neighbour
    return Fraction(repr(float(value)))


def _scaled_load_ceiling(params: SystemParams, factor: Fraction) -> int:
    """ceil(lambda / mu * factor) in exact rational arithmetic."""
    return max(1, math.ceil(_decimal(params.lam) / _decimal(params.mu) * factor))


def staff_qd(params: SystemParams, gamma: float) -> StaffingResult:
    """Quality-driven staffing N = R (1 + gamma), rounded up."""
    _check_probability("gamma", gamma)
    load = params.offered_load
    return StaffingResult(Regime.QD, _scaled_load_ceiling(params, 1 + _decimal(gamma)), load, gamma_used=gamma)


def staff_ed(params: SystemParams, gamma: float) -> StaffingResult:
    """Efficiency-driven staffing N = R (1 - gamma), rounded up, at least 1."""
    _check_probability("gamma", gamma)
    load = params.offered_load
    return StaffingResult(Regime.ED, _scaled_load_ceiling(params, 1 - _decimal(gamma)), load, gamma_used=gamma)


def qed_delay_probability(beta: float, params: SystemParams) -> float:
    """Asymptotic delay probability P_w(beta) of the square-root regime."""
    if params.theta <= 0:
        raise InputValidationError("square-root staffing with abandonment needs theta > 0")
    beta_hat = beta * math.sqrt(params.mu / params.theta)
    hazard_neg = normal_hazard(-beta)
    if hazard_neg == 0.0:
        return 0.0
    return 1.0 / (1.0 + math.sqrt(params.theta / params.mu) * normal_hazard(beta_hat) / hazard_neg)


def _scaled_abandonment(beta: float, params: SystemParams) -> float:
    """sqrt(lambda) * P{Ab} in the square-root regime, i.e. P_a(beta) P_w(beta)."""
    beta_hat = beta * math.sqrt(params.mu / params.theta)
    p_a = math.sqrt(params.theta) * (normal_hazard(beta_hat) - beta_hat)
    return p_a * qed_delay_probability(beta, params)


def qed_abandonment_approximation(beta: float, params: SystemParams) -> float:
    """Asymptotic P{Ab} ~ P_a(beta) P_w(beta) / sqrt(lambda) for service grade beta."""
    if params.theta <= 0:
        raise InputValidationError("square-root staffing with abandonment needs theta > 0")
    return _scaled_abandonment(beta, params) / math.sqrt(params.lam)


def solve_beta_star(
    target_abandon: float,
    params: SystemParams,
    bracket: tuple[float, float] = BETA_BRACKET,
) -> float:
    """
    Service grade beta* at which the asymptotic P{Ab} equals the target.

    The right-hand side decreases in beta, so the root is bracketed on
    `bracket` and the bracket is widened until the sign changes.

    Args:
        target_abandon (float): Abandonment target M in (0, 1)
        params (SystemParams): Rates with theta > 0
        bracket (tuple): Initial search interval for beta

    Returns:
        float: beta*
    """
    _check_probability("target abandonment", target_abandon)
    if params.theta <= 0:
        raise InputValidationError("square-root staffing with abandonment needs theta > 0")
    lhs = target_abandon * math.sqrt(params.lam)

    def gap(beta: float) -> float:
        return _scaled_abandonment(beta, params) - lhs

    low, high = bracket
    while gap(low) * gap(high) > 0:
        width = high - low
        if width > BETA_BRACKET_LIMIT:
            raise NoRootInBracketError(
                f"no-root-in-bracket: beta* not found in [{low:g}, {high:g}] "
                f"for target {target_abandon} and {params}"
            )
        low, high = low - width, high + width
        logger.debug("widening beta* bracket to [%g, %g]", low, high)

    beta_star = float(brentq(gap, low, high, xtol=BETA_XTOL))
    residual = abs(gap(beta_star))
    if residual > _RESIDUAL_TOLERANCE:
        raise NumericalInconsistencyError(
            f"numerical-inconsistency: beta* residual {residual:.3e} exceeds {_RESIDUAL_TOLERANCE}"
        )
    return beta_star


def staff_qed(target_abandon: float, params: SystemParams) -> StaffingResult:
    """Square-root staffing N = R + beta* sqrt(R), rounded up."""
    beta_star = solve_beta_star(target_abandon, params)
    load = params.offered_load
    beds = max(1, math.ceil(load + beta_star * math.sqrt(load)))
    logger.debug("QED staffing: beta*=%.6f, R=%.4f, N=%d", beta_star, load, beds)
    return StaffingResult(Regime.QED, beds, load, beta_star=beta_star, gamma_used=target_abandon)


def _smallest_feasible(params: SystemParams, feasible) -> tuple[int, dict[int, ErlangAMetrics]]:
    """Fewest beds for which feasible(metrics) holds; feasibility is monotone in N."""
    cache: dict[int, ErlangAMetrics] = {}

    def meets(beds: int) -> bool:
        if beds not in cache:
            cache[beds] = erlang_a_metrics(beds, params)
        return feasible(cache[beds])

    # Without abandonment only stable bed counts have a steady state
    first = 1 if params.theta > 0 else math.floor(params.offered_load) + 1
    if meets(first):
        return first, cache

    bad, good = first, 2 * first
    while not meets(good):
        bad, good = good, 2 * good
        if good > STAFFING_SEARCH_LIMIT:
            raise NumericalInconsistencyError(
                f"numerical-inconsistency: no bed count up to {STAFFING_SEARCH_LIMIT} meets the cap"
            )
    while good - bad > 1:
        middle = (bad + good) // 2
        if meets(middle):
            good = middle
        else:
            bad = middle
    logger.debug("exact bed search settled on N=%d after %d evaluations", good, len(cache))
    return good, cache


def min_beds_for_abandonment(params: SystemParams, alpha: float) -> StaffingResult:
    """
    Fewest beds N with exact P{Ab}(N) <= alpha.

    Args:
        params (SystemParams): Arrival, service and patience rates
        alpha (float): Cap on the abandonment probability

    Returns:
        StaffingResult: N with the metrics at N and at N - 1
    """
    _check_probability("alpha", alpha)
    beds, cache = _smallest_feasible(params, lambda m: m.p_ab <= alpha)
    return StaffingResult(
        Regime.EXACT_AB,
        beds,
        params.offered_load,
        gamma_used=alpha,
        metrics=cache[beds],
        previous_metrics=cache.get(beds - 1) or _metrics_or_none(beds - 1, params),
    )


def min_beds_for_wait(params: SystemParams, max_mean_wait: float) -> StaffingResult:
    """
    Fewest beds N with exact E[W](N) <= max_mean_wait.

    The result carries P{Ab} at N because a wait cap can be met while many
    youth abandon: abandoning youth shorten the average wait.
    """
    if not max_mean_wait > 0:
        raise InputValidationError(f"maximum mean wait must be > 0 days, got {max_mean_wait!r}")
    beds, cache = _smallest_feasible(params, lambda m: m.mean_wait <= max_mean_wait)
    metrics = cache[beds]
    note = None
    if metrics.p_ab > ABANDONMENT_TARGET:
        note = (
            f"E[W] <= {max_mean_wait:g} days holds with P{{Ab}} = {metrics.p_ab:.1%}; "
            "abandoning youth shorten the mean wait"
        )
        logger.warning(note)
    return StaffingResult(
        Regime.EXACT_WAIT,
        beds,
        params.offered_load,
        metrics=metrics,
        previous_metrics=cache.get(beds - 1) or _metrics_or_none(beds - 1, params),
        note=note,
    )


def _metrics_or_none(beds: int, params: SystemParams) -> ErlangAMetrics | None:
    if beds < 1 or (params.theta == 0 and params.lam >= beds * params.mu):
        return None
    return erlang_a_metrics(beds, params)


def staffing_table(params: SystemParams, alpha: float, max_mean_wait: float) -> pd.DataFrame:
    """
    Beds required under each regime for both global constraints.

    For the E[W] constraint the regime formulas use the abandonment target
    gamma = theta * M, from P{Ab} = E[W] theta.

    Returns:
        pd.DataFrame: One row per (constraint, regime) with the exact P{Ab}
        and E[W] at the recommended bed count
    """
    if params.theta <= 0:
        raise InputValidationError("the staffing table needs theta > 0")
    wait_gamma = min(params.theta * max_mean_wait, 0.99)
    plans = {
        f"P{{Ab}}<={alpha:g}": (alpha, min_beds_for_abandonment(params, alpha)),
        f"E[W]<={max_mean_wait:g}": (wait_gamma, min_beds_for_wait(params, max_mean_wait)),
    }
    rows = []
    for constraint, (gamma, exact) in plans.items():
        for result in (
            staff_ed(params, gamma),
            staff_qed(gamma, params),
            staff_qd(params, gamma),
            exact,
        ):
            metrics = result.metrics or erlang_a_metrics(result.beds, params)
            rows.append(
                {
                    "constraint": constraint,
                    "regime": result.regime.value,
                    "beds": result.beds,
                    "beta_star": result.beta_star,
                    "gamma": result.gamma_used,
                    "p_ab": metrics.p_ab,
                    "mean_wait": metrics.mean_wait,
                }
            )
    return pd.DataFrame(rows)
