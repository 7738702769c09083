"""
Erlang-A (M/M/N+M) steady-state metrics

This module defines:
- SystemParams, the aggregate arrival, service and patience rates
- ErlangAMetrics, the exact steady-state performance of N beds
- The truncated birth-death stationary distribution
- The incomplete-gamma closed form of P{Ab | W > 0}

Exact metrics come from the birth-death chain with birth rate lambda and
death rate min(k, N) mu + max(k - N, 0) theta. The closed form is kept as an
independent computation of the same quantity.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from config import CLAMP_TOLERANCE, TAIL_EPS, TRUNCATION_SIGMA
from src.errors import (
    InputValidationError,
    NumericalInconsistencyError,
    UnstableWithoutAbandonmentError,
)
from src.queueing.special import log_a_func

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemParams:
    """
    Aggregate rates of the shelter queue, all per day.

    Args:
        lam (float): Arrival rate lambda, > 0
        mu (float): Service completions per bed, > 0
        theta (float): Abandonment rate of a waiting youth, >= 0
    """

    lam: float
    mu: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InputValidationError(f"lambda must be finite and > 0, got {self.lam!r}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise InputValidationError(f"mu must be finite and > 0, got {self.mu!r}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise InputValidationError(f"theta must be finite and >= 0, got {self.theta!r}")

    @property
    def offered_load(self) -> float:
        """R = lambda / mu, the mean number of beds demand would occupy."""
        return self.lam / self.mu

    def with_rate(self, name: str, value: float) -> "SystemParams":
        """Copy with one of lambda, mu or theta replaced."""
        fields = {"lambda": "lam", "lam": "lam", "mu": "mu", "theta": "theta"}
        if name not in fields:
            raise InputValidationError(f"unknown rate {name!r}; expected lambda, mu or theta")
        values = {"lam": self.lam, "mu": self.mu, "theta": self.theta}
        values[fields[name]] = value
        return SystemParams(**values)


@dataclass(frozen=True)
class ErlangAMetrics:
    """Exact steady-state metrics of an M/M/N+M queue with N beds."""

    beds: int
    p_wait: float
    p_ab_given_wait: float
    p_ab: float
    mean_wait: float
    mean_busy_servers: float
    occupancy: float
    mean_queue_length: float
    truncation: int


def _check_beds(beds: int) -> int:
    if isinstance(beds, bool) or int(beds) != beds or beds < 1:
        raise InputValidationError(f"number of beds must be a positive integer, got {beds!r}")
    return int(beds)


def _log_weights(beds: int, params: SystemParams, top: int) -> np.ndarray:
    """Unnormalized log pi_0..pi_top from the birth-death ratio recursion."""
    k = np.arange(1, top + 1, dtype=float)
    deaths = np.minimum(k, beds) * params.mu + np.maximum(k - beds, 0.0) * params.theta
    return np.concatenate(([0.0], np.cumsum(np.log(params.lam) - np.log(deaths))))


def stationary_distribution(
    beds: int, params: SystemParams, tail_eps: float = TAIL_EPS
) -> np.ndarray:
    """
    Stationary distribution pi_0..pi_Kmax of the number of youth in the system.

    The chain is truncated where the residual tail mass falls below tail_eps,
    and never before N + 20 sqrt(lambda / theta + N) states. Probabilities are
    built from log ratios and normalized once.

    Args:
        beds (int): Number of beds N >= 1
        params (SystemParams): Arrival, service and patience rates
        tail_eps (float): Tail mass tolerance in (0, 1e-6]

    Returns:
        np.ndarray: State probabilities summing to 1
    """
    beds = _check_beds(beds)
    if not 0 < tail_eps <= 1e-6:
        raise InputValidationError(f"tail_eps must lie in (0, 1e-6], got {tail_eps!r}")
    if params.theta == 0 and params.lam >= beds * params.mu:
        raise UnstableWithoutAbandonmentError(beds, params.lam, params.mu)

    spread = params.lam / params.theta if params.theta > 0 else params.offered_load
    top = beds + int(math.ceil(TRUNCATION_SIGMA * math.sqrt(spread + beds)))
    while True:
        log_w = _log_weights(beds, params, top)
        peak = log_w.max()
        weights = np.exp(log_w - peak)
        total = weights.sum()
        # Beyond N the ratios lambda / d_k never increase, so the tail is geometric
        next_death = beds * params.mu + (top + 1 - beds) * params.theta
        ratio = params.lam / next_death
        if ratio < 1.0 and weights[-1] * ratio / (1.0 - ratio) < tail_eps * total:
            break
        top *= 2
    logger.debug("stationary distribution truncated at %d states (N=%d)", top, beds)
    return weights / total


def erlang_a_metrics(
    beds: int, params: SystemParams, tail_eps: float = TAIL_EPS
) -> ErlangAMetrics:
    """
    Exact steady-state metrics of the M/M/N+M queue.

    E[W] is the mean time in queue over all arrivals, counting the time
    abandoning youth spend waiting before they leave.

    Args:
        beds (int): Number of beds N
        params (SystemParams): Arrival, service and patience rates
        tail_eps (float): Truncation tolerance of the stationary distribution

    Returns:
        ErlangAMetrics: Delay, abandonment, wait and occupancy figures
    """
    pi = stationary_distribution(beds, params, tail_eps)
    k = np.arange(pi.size, dtype=float)
    in_queue = np.maximum(k - beds, 0.0)
    busy = np.minimum(k, beds)

    p_wait = float(pi[beds:].sum())
    mean_queue = float(in_queue @ pi)
    p_ab = params.theta * mean_queue / params.lam
    mean_busy = float(busy @ pi)
    p_ab_given_wait = p_ab / p_wait if p_wait > 0 else 0.0

    return ErlangAMetrics(
        beds=beds,
        p_wait=min(p_wait, 1.0),
        p_ab_given_wait=min(p_ab_given_wait, 1.0),
        p_ab=min(p_ab, 1.0),
        mean_wait=mean_queue / params.lam,
        mean_busy_servers=mean_busy,
        occupancy=mean_busy / beds,
        mean_queue_length=mean_queue,
        truncation=pi.size - 1,
    )


def p_ab_given_wait_closed_form(beds: int, params: SystemParams) -> float:
    """
    P{Ab | W > 0} from the incomplete-gamma identity.

    Evaluates 1 / (rho A(N mu / theta, lambda / theta)) + 1 - 1 / rho with
    rho = lambda / (N mu), written as 1 - (1 - 1/A) / rho to keep precision.

    Args:
        beds (int): Number of beds N
        params (SystemParams): Rates with theta > 0

    Returns:
        float: Conditional abandonment probability of a delayed youth
    """
    beds = _check_beds(beds)
    if params.theta <= 0:
        raise InputValidationError("the closed form of P{Ab | W > 0} needs theta > 0")
    rho = params.lam / (beds * params.mu)
    log_a = log_a_func(beds * params.mu / params.theta, params.lam / params.theta)
    value = 1.0 + math.expm1(-log_a) / rho

    if -CLAMP_TOLERANCE <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + CLAMP_TOLERANCE:
        return 1.0
    if not 0.0 <= value <= 1.0:
        raise NumericalInconsistencyError(
            f"numerical-inconsistency: P{{Ab|W>0}} = {value!r} for N={beds}, {params}"
        )
    return value


def mean_wait_from_abandonment(p_ab: float, theta: float) -> float:
    """E[W] recovered from P{Ab} through P{Ab} = E[W] * theta."""
    if theta <= 0:
        raise InputValidationError("E[W] = P{Ab} / theta needs theta > 0")
    return p_ab / theta
