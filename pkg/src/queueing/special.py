"""
Special functions for the Erlang-A closed forms

This module defines:
- The lower incomplete gamma function gamma(x, y) with the e^{-t} integrand
- A(x, y) = x e^y / y^x * gamma(x, y), evaluated in log space
- The hazard rate of the standard normal distribution

A(x, y) has the series 1 + y/(x+1) + y^2/((x+1)(x+2)) + ..., which never
overflows while y <= x. Past that point the series terms grow before they
decay, so the regularized gamma form is used instead.
"""

import math

import numpy as np
from scipy.special import erfcx, gammainc, gammaln, logsumexp
from scipy.stats import norm

from src.errors import InputValidationError

_SQRT_TWO = math.sqrt(2.0)
_SQRT_TWO_OVER_PI = math.sqrt(2.0 / math.pi)
_SERIES_REL_TOL = 1e-17
_HAZARD_SWITCH = 5.0


def _log_a_series(x: float, y: float) -> float:
    """Sum log(sum_n y^n / prod_{i<=n}(x+i)) for y <= x."""
    n_terms = int(y + 40.0 * math.sqrt(y + 1.0)) + 64
    while True:
        steps = math.log(y) - np.log(x + np.arange(1, n_terms + 1, dtype=float))
        log_terms = np.concatenate(([0.0], np.cumsum(steps)))
        total = float(logsumexp(log_terms))
        # The terms are decreasing, so the last one bounds the remainder ratio
        if log_terms[-1] - total < math.log(_SERIES_REL_TOL):
            return total
        n_terms *= 2


def log_a_func(x: float, y: float) -> float:
    """
    Natural logarithm of A(x, y) = x e^y / y^x * gamma(x, y).

    Args:
        x (float): Shape argument, N * mu / theta in the Erlang-A identity
        y (float): Upper integration limit, lambda / theta

    Returns:
        float: log A(x, y)
    """
    if not (x > 0 and y > 0):
        raise InputValidationError(f"A(x, y) needs x > 0 and y > 0, got x={x!r}, y={y!r}")
    if y <= x:
        return _log_a_series(x, y)
    return math.log(x) + y - x * math.log(y) + float(gammaln(x)) + math.log(float(gammainc(x, y)))


def a_func(x: float, y: float) -> float:
    """A(x, y); overflows to inf only when A itself exceeds the float range."""
    return math.exp(log_a_func(x, y))


def log_lower_incomplete_gamma(x: float, y: float) -> float:
    """log of gamma(x, y) = integral_0^y t^(x-1) e^(-t) dt for y > 0."""
    if not (x > 0 and y > 0):
        raise InputValidationError(
            f"log gamma(x, y) needs x > 0 and y > 0, got x={x!r}, y={y!r}"
        )
    if y <= x:
        return x * math.log(y) - y - math.log(x) + _log_a_series(x, y)
    return float(gammaln(x)) + math.log(float(gammainc(x, y)))


def lower_incomplete_gamma(x: float, y: float) -> float:
    """
    Lower incomplete gamma function with the standard e^{-t} integrand.

    The value is the regularized P(x, y) rescaled by Gamma(x), computed in
    log space so that small values do not underflow early.

    Args:
        x (float): Shape, must be > 0
        y (float): Upper limit, must be >= 0

    Returns:
        float: gamma(x, y)
    """
    if not x > 0 or not y >= 0:
        raise InputValidationError(f"gamma(x, y) needs x > 0 and y >= 0, got x={x!r}, y={y!r}")
    if y == 0:
        return 0.0
    return math.exp(log_lower_incomplete_gamma(x, y))


def normal_hazard(x: float) -> float:
    """
    Hazard rate phi(x) / (1 - Phi(x)) of the standard normal distribution.

    For x > 5 the survival function is written with the scaled
    complementary error function so the ratio keeps full precision.
    """
    x = float(x)
    if x > _HAZARD_SWITCH:
        return _SQRT_TWO_OVER_PI / float(erfcx(x / _SQRT_TWO))
    return float(norm.pdf(x) / norm.sf(x))
