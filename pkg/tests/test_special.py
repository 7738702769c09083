import math

import pytest
from scipy.integrate import quad

from src.errors import InputValidationError
from src.queueing.special import a_func, log_a_func, lower_incomplete_gamma, normal_hazard


def _gamma_by_quadrature(x, y):
    value, _ = quad(lambda t: t ** (x - 1) * math.exp(-t), 0, y, limit=200)
    return value


@pytest.mark.parametrize("x, y", [(3.5, 2.0), (2.0, 5.0), (10.0, 10.0), (1.5, 0.25), (8.0, 30.0)])
def test_lower_incomplete_gamma_matches_quadrature(x, y):
    assert lower_incomplete_gamma(x, y) == pytest.approx(_gamma_by_quadrature(x, y), rel=1e-8)


def test_lower_incomplete_gamma_at_zero():
    assert lower_incomplete_gamma(2.0, 0.0) == 0.0


@pytest.mark.parametrize("y", [0.5, 1.0, 3.0, 12.0])
def test_a_func_with_unit_shape(y):
    # A(1, y) = (e^y - 1) / y
    assert a_func(1.0, y) == pytest.approx(math.expm1(y) / y, rel=1e-10)


@pytest.mark.parametrize("x, y", [(4.0, 3.0), (4.0, 6.0), (20.0, 25.0)])
def test_a_func_matches_definition(x, y):
    expected = x * math.exp(y) / y**x * _gamma_by_quadrature(x, y)
    assert a_func(x, y) == pytest.approx(expected, rel=1e-7)


def test_log_a_func_is_continuous_across_branches():
    x = 50.0
    below, above = log_a_func(x, x), log_a_func(x, x * (1 + 1e-9))
    assert above == pytest.approx(below, rel=1e-7)


def test_log_a_func_large_arguments_stay_finite():
    # Shelter-sized arguments: N mu / theta and lambda / theta
    value = log_a_func(270 * 0.016 / 0.5, 4.44 / 0.5)
    assert math.isfinite(value)
    assert value > 0


@pytest.mark.parametrize("x, y", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
def test_a_func_rejects_non_positive_arguments(x, y):
    with pytest.raises(InputValidationError):
        log_a_func(x, y)


def test_normal_hazard_at_zero():
    assert normal_hazard(0.0) == pytest.approx(2 / math.sqrt(2 * math.pi), rel=1e-12)


def test_normal_hazard_is_continuous_at_switch():
    assert normal_hazard(5.0 + 1e-9) == pytest.approx(normal_hazard(5.0), rel=1e-7)


@pytest.mark.parametrize("x", [6.0, 10.0, 30.0, 100.0])
def test_normal_hazard_tail_bounds(x):
    # x < h(x) < x + 1/x for x > 0
    h = normal_hazard(x)
    assert x < h < x + 1 / x


def test_normal_hazard_is_increasing():
    values = [normal_hazard(x) for x in (-5.0, -1.0, 0.0, 1.0, 4.9, 5.1, 8.0)]
    assert values == sorted(values)
    assert normal_hazard(-10.0) > 0
