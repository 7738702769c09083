import pytest

from src.errors import InfeasibleError, InputValidationError
from src.experiments.calibration import calibrate_thresholds_by_simulation
from src.population.attributes import ClassMix
from src.queueing.erlang import SystemParams
from src.queueing.staffing import QosTargets, WaitCap
from src.queueing.thresholds import ThresholdPolicy
from src.simulation.shelter import ScenarioConfig

SEED = 4242


def _two_groups(lam_high, lam_low, beds, mu=1.0, theta=1.0, horizon=60.0):
    return ScenarioConfig(
        params=SystemParams(lam_high + lam_low, mu, theta),
        mix=ClassMix.from_rates([lam_high, lam_low], labels=("high", "low")),
        beds=beds,
        policy=ThresholdPolicy((0, 0)),
        horizon_days=horizon,
        name="two-groups",
    )


def test_caps_met_without_thresholds():
    config = _two_groups(0.5, 0.5, beds=6)
    caps = QosTargets(0.5, 10.0, wait_caps=(WaitCap(0.9, 1.0),))
    policy = calibrate_thresholds_by_simulation(config, caps, max_k=6, reps=2, base_seed=SEED)
    assert policy.thresholds == (0, 0)
    assert policy.source == "calibrated"


def test_overloaded_top_group_is_infeasible():
    # Two beds cannot serve a high-priority stream of five a day
    config = _two_groups(5.0, 5.0, beds=2)
    caps = QosTargets(0.5, 10.0, abandon_caps=(0.01,))
    with pytest.raises(InfeasibleError, match="infeasible-at-maxK"):
        calibrate_thresholds_by_simulation(config, caps, max_k=2, reps=2, base_seed=SEED)


def test_reservation_found_for_congested_shelter():
    config = _two_groups(1.0, 4.0, beds=5, horizon=80.0)
    caps = QosTargets(0.5, 10.0, abandon_caps=(0.2,))
    policy = calibrate_thresholds_by_simulation(config, caps, max_k=5, reps=3, base_seed=SEED)
    assert policy.thresholds[0] == 0
    assert 0 <= policy.thresholds[1] <= 5


def test_calibration_is_deterministic():
    config = _two_groups(1.0, 4.0, beds=5, horizon=40.0)
    caps = QosTargets(0.5, 10.0, abandon_caps=(0.2,))
    first = calibrate_thresholds_by_simulation(config, caps, max_k=5, reps=2, base_seed=SEED)
    second = calibrate_thresholds_by_simulation(config, caps, max_k=5, reps=2, base_seed=SEED)
    assert first == second


def test_calibration_input_checks():
    config = _two_groups(0.5, 0.5, beds=6)
    with pytest.raises(InputValidationError):
        calibrate_thresholds_by_simulation(config, QosTargets(0.5, 10.0), max_k=6, reps=2)
    caps = QosTargets(0.5, 10.0, abandon_caps=(0.2,))
    with pytest.raises(InputValidationError):
        calibrate_thresholds_by_simulation(config, caps, max_k=7, reps=2)
    with pytest.raises(InputValidationError):
        calibrate_thresholds_by_simulation(config, QosTargets(0.5, 10.0, abandon_caps=(0.2, 0.3)), max_k=6)
