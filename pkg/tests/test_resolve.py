import pytest

from src.errors import InputValidationError
from src.scenarios.resolve import Scenario
from src.scenarios.scenario_file import parse_scenario_text

BASE = """\
name = "resolve-test"

[system]
lambda = 4.44
theta = 0.5

[simulation]
horizon_days = 60
replications = 2
"""


def _scenario(extra=""):
    return Scenario(parse_scenario_text(BASE + extra))


def test_auto_capacity_uses_file_regime():
    scenario = _scenario('\n[capacity]\nbeds = "auto"\nregime = "qd"\ngamma = 0.1\n')
    assert scenario.beds == 306


def test_exact_regime_staffing():
    scenario = _scenario('\n[capacity]\nregime = "exact-ab"\n')
    result = scenario.staff()
    assert result.metrics.p_ab <= scenario.qos.alpha_global
    assert scenario.staff("ed").beds < result.beds


def test_group_rates_from_attributes():
    scenario = _scenario()
    assert scenario.n_groups == 6
    assert sum(scenario.class_mix.rates) == pytest.approx(4.44)


def test_explicit_rates_must_match_lambda():
    scenario = _scenario("\n[population]\nrates = [1.0, 1.0]\n")
    with pytest.raises(InputValidationError):
        scenario.mix


def test_explicit_rates_get_letter_labels():
    scenario = _scenario("\n[population]\nrates = [2.0, 2.44]\n")
    assert scenario.class_mix.labels == ("A", "B")


def test_explicit_policy():
    scenario = _scenario("\n[capacity]\nbeds = 270\n\n[policy]\nthresholds = [0, 0, 0, 0, 0, 25]\n")
    policy = scenario.policy()
    assert policy.thresholds == (0, 0, 0, 0, 0, 25)
    assert policy.source == "explicit"
    assert scenario.base_config().policy is policy


def test_analytic_policy_on_overloaded_shelter_is_degenerate():
    scenario = _scenario("\n[capacity]\nbeds = 270\n")
    policy = scenario.policy()
    assert policy.source == "analytic"
    assert policy.degenerate


def test_abandonment_caps_policy():
    scenario = _scenario('\n[capacity]\nbeds = 270\n\n[policy]\ncaps = "abandon"\n')
    policy = scenario.policy()
    assert len(policy.thresholds) == 6
    assert policy.thresholds[0] == 0


def test_unknown_policy_mode():
    with pytest.raises(InputValidationError):
        _scenario("\n[capacity]\nbeds = 270\n").policy(mode="random")


def test_variants_become_configs():
    text = """
[capacity]
beds = 270

[[variants]]
name = "Current System"
beds = 164
thresholds = [0, 0, 0, 0, 0, 0]

[[variants]]
name = "Base Model"
thresholds = [0, 0, 0, 0, 0, 25]
"""
    configs = _scenario(text).configs()
    assert [c.name for c in configs] == ["Current System", "Base Model"]
    assert [c.beds for c in configs] == [164, 270]
    assert configs[1].horizon_days == 60


def test_sweep_grid_fallbacks():
    scenario = _scenario('\n[sweep]\nparameter = "theta"\nvalues = [0.5, 1.0]\n')
    assert scenario.sweep_spec().values == (0.5, 1.0)
    assert scenario.sweep_spec("theta", [0.25]).values == (0.25,)
    assert scenario.sweep_spec("mu").values == (0.014, 0.015, 0.016, 0.018, 0.021)
    with pytest.raises(InputValidationError):
        _scenario().sweep_spec()
