import math

import pytest

from config import WAIT_CAPS
from src.errors import DegenerateLoadError, InputValidationError
from src.population.attributes import AttributeModel, class_arrival_rates
from src.queueing.erlang import SystemParams, erlang_a_metrics
from src.queueing.staffing import WaitCap
from src.queueing.thresholds import (
    ThresholdPolicy,
    class_delay_profile,
    cumulative_loads,
    thresholds_for_abandon_caps,
    thresholds_for_wait_caps,
)

SHELTER = SystemParams(4.44, 0.016, 0.5)


def _shelter_loads(beds):
    rates = class_arrival_rates(SHELTER.lam, AttributeModel()).rates
    return cumulative_loads(rates, beds, SHELTER.mu)


def test_two_equal_groups():
    loads = cumulative_loads([1.0, 1.0], beds=4, mu=1.0)
    assert loads.sigma == pytest.approx((0.25, 0.5))
    assert loads.omega_hat[(0, 1)] == pytest.approx(1 / (4 * 0.5 * 0.75))
    assert not loads.is_degenerate(1)


def test_single_group_has_no_pairs():
    loads = cumulative_loads([2.0], beds=4, mu=1.0)
    assert loads.sigma == pytest.approx((0.5,))
    assert loads.omega_hat == {}


def test_overloaded_shelter_is_marked_degenerate():
    loads = _shelter_loads(270)
    assert loads.sigma[-1] == pytest.approx(4.44 / 4.32)
    assert loads.omega_hat[(4, 5)] is None
    assert loads.omega_hat[(3, 4)] is not None
    assert all(a < b for a, b in zip(loads.sigma, loads.sigma[1:]))


def test_loads_need_positive_rates():
    with pytest.raises(InputValidationError):
        cumulative_loads([1.0, 0.0], beds=4, mu=1.0)


def test_slack_caps_give_zero_thresholds():
    loads = cumulative_loads([1.0, 1.0, 1.0], beds=6, mu=1.0)
    caps = [WaitCap(0.99, 1000.0), WaitCap(0.99, 1000.0)]
    policy = thresholds_for_wait_caps(loads, caps, p_wait_lowest=0.3)
    assert policy.thresholds == (0, 0, 0)
    assert policy.source == "analytic"
    assert not policy.degenerate


def test_wait_cap_step_matches_formula():
    loads = cumulative_loads([1.0, 1.0], beds=4, mu=1.0)
    cap = WaitCap(0.05, 1.0)
    p_wait = 0.4
    expected = math.ceil(math.log(0.05 / (p_wait * loads.omega_hat[(0, 1)])) / math.log(0.25))
    policy = thresholds_for_wait_caps(loads, [cap], p_wait)
    assert policy.thresholds == (0, expected)


def test_abandon_cap_small_case_by_hand():
    # sigma = (1/3, 2/3), omega-hat = 1.5, numerator 0.01:
    # ln(0.01 / 0.75) / ln(1/3) = 3.93, so K_2 = 4
    loads = cumulative_loads([1.0, 1.0], beds=3, mu=1.0)
    policy = thresholds_for_abandon_caps(loads, [0.01], theta=1.0, p_wait_lowest=0.5)
    assert policy.thresholds == (0, 4)


def test_abandon_caps_need_theta():
    loads = cumulative_loads([1.0, 1.0], beds=3, mu=1.0)
    with pytest.raises(InputValidationError):
        thresholds_for_abandon_caps(loads, [0.01], theta=0.0, p_wait_lowest=0.5)


def test_abandon_numerator_variant():
    loads = cumulative_loads([1.0, 1.0], beds=4, mu=1.0)
    caps = [WaitCap(0.2, 1.0)]
    by_wait = thresholds_for_wait_caps(loads, caps, 0.4)
    by_abandon = thresholds_for_wait_caps(loads, caps, 0.4, numerator="abandon", abandon_caps=[0.01])
    assert by_abandon.thresholds[1] >= by_wait.thresholds[1]
    with pytest.raises(InputValidationError):
        thresholds_for_wait_caps(loads, caps, 0.4, numerator="abandon")


def test_baseline_policy_is_flagged_degenerate():
    loads = _shelter_loads(270)
    p_wait = erlang_a_metrics(270, SHELTER).p_wait
    caps = [WaitCap(x, t) for x, t in WAIT_CAPS]
    policy = thresholds_for_wait_caps(loads, caps, p_wait)
    assert policy.degenerate
    assert policy.thresholds[:5] == (0, 0, 0, 0, 0)
    assert policy.thresholds[5] > 30
    with pytest.raises(DegenerateLoadError, match="degenerate-load"):
        thresholds_for_wait_caps(loads, caps, p_wait, allow_degenerate=False)


def test_thresholds_ignore_time_scale():
    caps = [WaitCap(0.05, 1.0), WaitCap(0.1, 2.0)]
    base = cumulative_loads([0.5, 1.0, 1.5], beds=10, mu=0.4)
    scaled = cumulative_loads([5.0, 10.0, 15.0], beds=10, mu=4.0)
    faster = [WaitCap(cap.fraction, cap.days / 10) for cap in caps]
    assert scaled.sigma == pytest.approx(base.sigma)
    assert (
        thresholds_for_wait_caps(scaled, faster, 0.3).thresholds
        == thresholds_for_wait_caps(base, caps, 0.3).thresholds
    )


def test_equal_thresholds_share_delay_probability():
    loads = cumulative_loads([1.0, 1.0, 1.0], beds=6, mu=1.0)
    profile = class_delay_profile(ThresholdPolicy((0, 0, 0)), loads, 0.3)
    assert profile.p_wait_by_class == pytest.approx((0.3, 0.3, 0.3))


def test_unit_step_halves_delay_probability():
    loads = cumulative_loads([2.0, 1.0], beds=4, mu=1.0)
    profile = class_delay_profile(ThresholdPolicy((0, 1)), loads, 0.4)
    assert profile.p_wait_by_class == pytest.approx((0.2, 0.4))


def test_baseline_profile_rises_with_group_index():
    loads = _shelter_loads(270)
    p_wait = erlang_a_metrics(270, SHELTER).p_wait
    profile = class_delay_profile(ThresholdPolicy((0, 0, 0, 0, 0, 25)), loads, p_wait)
    values = profile.p_wait_by_class
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


@pytest.mark.parametrize("thresholds", [(), (1, 2), (0, 3, 2), (0, -1)])
def test_invalid_policies(thresholds):
    with pytest.raises(InputValidationError):
        ThresholdPolicy(thresholds)


def test_policy_from_increments():
    policy = ThresholdPolicy.from_increments([0, 2, 3])
    assert policy.thresholds == (0, 0, 2, 5)
    assert policy.increments == (0, 2, 3)
