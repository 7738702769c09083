import math

import numpy as np
import pytest

from src.errors import InputValidationError
from src.population.attributes import AttributeModel, ClassMix, sample_group_indices
from src.queueing.erlang import SystemParams
from src.queueing.thresholds import ThresholdPolicy
from src.simulation.events import EventCalendar, EventKind
from src.simulation.shelter import (
    COMPACT_MIN,
    PROFILE_BLOCK,
    ScenarioConfig,
    _random_streams,
    _ShelterRun,
    run_replication,
)
from src.simulation.trace import (
    ADMISSION,
    TraceLog,
    TraceRecord,
    read_trace,
    verify_threshold_trace,
    write_trace,
)
from src.simulation.youth import Outcome, Youth

SEED = 12345


def _baseline(beds=270, thresholds=(0, 0, 0, 0, 0, 25), **overrides):
    values = {
        "params": SystemParams(4.44, 0.016, 0.5),
        "mix": AttributeModel(),
        "beds": beds,
        "policy": ThresholdPolicy(thresholds),
        "horizon_days": 120.0,
        "name": "baseline",
    }
    values.update(overrides)
    return ScenarioConfig(**values)


def _single_class(lam, mu, theta, beds, horizon, threshold=0):
    return ScenarioConfig(
        params=SystemParams(lam, mu, theta),
        mix=ClassMix.from_rates([lam], labels=("A",)),
        beds=beds,
        policy=ThresholdPolicy((threshold,)),
        horizon_days=horizon,
    )


def test_every_arrival_is_accounted_for():
    metrics = run_replication(_baseline(), SEED)
    assert metrics.total_arrivals > 0
    np.testing.assert_array_equal(
        metrics.arrivals, metrics.served + metrics.abandoned + metrics.waiting_at_horizon
    )
    assert 0.0 <= metrics.mean_utilization <= 1.0


def test_same_seed_same_results():
    config = _baseline()
    first, trace_a = run_replication(config, SEED, 3, trace=True)
    second, trace_b = run_replication(config, SEED, 3, trace=True)
    assert first.as_record() == second.as_record()
    assert trace_a.records == trace_b.records


def test_replications_differ():
    config = _baseline()
    assert run_replication(config, SEED, 0).as_record() != run_replication(config, SEED, 1).as_record()


def test_arrivals_do_not_depend_on_capacity():
    small = run_replication(_baseline(beds=164, thresholds=(0,) * 6), SEED, 2)
    large = run_replication(_baseline(beds=298, thresholds=(0,) * 6), SEED, 2)
    np.testing.assert_array_equal(small.arrivals, large.arrivals)
    assert small.total_abandoned > large.total_abandoned


def test_light_traffic_never_waits():
    metrics = run_replication(_single_class(0.01, 1.0, 0.5, beds=5, horizon=200.0), SEED)
    assert metrics.total_abandoned == 0
    assert metrics.mean_wait_days == 0.0
    assert metrics.mean_utilization < 0.05


def test_threshold_at_capacity_blocks_group():
    config = ScenarioConfig(
        params=SystemParams(2.0, 0.5, 1.0),
        mix=ClassMix.from_rates([1.0, 1.0], labels=("high", "low")),
        beds=3,
        policy=ThresholdPolicy((0, 3)),
        horizon_days=100.0,
    )
    metrics = run_replication(config, SEED)
    assert metrics.arrivals[1] > 0
    assert metrics.served[1] == 0
    assert metrics.served[0] > 0


def test_unlimited_patience_never_abandons():
    metrics = run_replication(_single_class(1.0, 0.5, 0.0, beds=3, horizon=200.0), SEED)
    assert metrics.total_abandoned == 0


def test_initial_occupancy_keeps_beds_busy():
    config = _single_class(0.001, 0.1, 0.5, beds=5, horizon=1.0).replace(initial_occupancy=5)
    assert run_replication(config, SEED).mean_utilization > 0.5


def test_warmup_excludes_early_arrivals():
    config = _baseline(warmup_days=60.0)
    cold = run_replication(_baseline(), SEED)
    warm = run_replication(config, SEED)
    assert warm.total_arrivals < cold.total_arrivals
    assert warm.window_days == pytest.approx(60.0)


@pytest.mark.slow
def test_single_bed_matches_erlang_a():
    metrics = run_replication(_single_class(1.0, 1.0, 1.0, beds=1, horizon=20_000.0), SEED)
    assert metrics.abandonment_proportion == pytest.approx(math.exp(-1), abs=0.02)
    assert metrics.mean_utilization == pytest.approx(1 - math.exp(-1), abs=0.02)
    assert metrics.mean_wait_days == pytest.approx(math.exp(-1), abs=0.03)


def test_waiting_lists_stay_compact():
    run = _ShelterRun(_baseline(beds=164, thresholds=(0,) * 6, horizon_days=360.0), SEED, 0, trace=False)
    metrics, _ = run.run()
    assert metrics.total_abandoned > 100
    for group, queue in enumerate(run.queues):
        assert len(queue) == run.queue_lengths[group] + run.stale[group]
        assert run.stale[group] <= max(COMPACT_MIN, run.queue_lengths[group])
        assert sum(not youth.is_waiting for youth in queue) == run.stale[group]


def test_arrival_groups_follow_the_profile_stream():
    config = _baseline()
    run = _ShelterRun(config, SEED, 2, trace=False)
    drawn = [run._draw_group() for _ in range(PROFILE_BLOCK + 10)]
    profiles = _random_streams(SEED, 2)["profiles"]
    expected = sample_group_indices(config.mix, profiles, 2 * PROFILE_BLOCK)
    assert drawn == expected[: PROFILE_BLOCK + 10].tolist()


def test_record_with_wait_exceedance():
    metrics = run_replication(_baseline(beds=164, thresholds=(0,) * 6), SEED)
    record = metrics.as_record(wait_days=(1.0, 1.0, 2.0, 2.0, 2.0))
    assert {"wait_exceedance_A", "wait_exceedance_E"} <= set(record)
    assert "wait_exceedance_F" not in record
    assert 0.0 <= record["wait_exceedance_A"] <= 1.0
    assert record["high_risk_abandoned"] == sum(record[f"abandoned_{g}"] for g in "ABCDE")


def test_base_model_trace_follows_policy():
    _, trace = run_replication(_baseline(horizon_days=360.0), SEED, trace=True)
    assert any(r.kind == ADMISSION for r in trace.records)
    verdict = verify_threshold_trace(trace)
    assert verdict, verdict.reason


def test_written_trace_verifies(tmp_path):
    _, trace = run_replication(_baseline(beds=200, thresholds=(0, 0, 1, 2, 3, 10)), SEED, trace=True)
    path = write_trace(trace, tmp_path / "trace.csv", {"base_seed": SEED, "replication": 0})
    assert path.read_text().splitlines()[1:3] == ["# base_seed: 12345", "# replication: 0"]
    loaded = read_trace(path)
    assert loaded.beds == 200
    assert loaded.thresholds == (0, 0, 1, 2, 3, 10)
    assert len(loaded.records) == len(trace.records)
    assert verify_threshold_trace(loaded)


def test_admission_below_threshold_is_caught():
    trace = TraceLog(
        beds=1,
        thresholds=(0, 1),
        records=[
            TraceRecord(0.5, "arrival", 0, 1, 1, 1, (0, 1)),
            TraceRecord(0.5, ADMISSION, 0, 1, 1, 0, (0, 0)),
        ],
    )
    verdict = verify_threshold_trace(trace)
    assert not verdict
    assert verdict.index == 1
    assert verdict.violation.kind == ADMISSION


def test_priority_inversion_is_caught():
    trace = TraceLog(
        beds=1,
        thresholds=(0, 0),
        records=[
            TraceRecord(1.0, "arrival", 0, 1, 0, 0, (0, 1)),
            TraceRecord(2.0, "arrival", 1, 0, 0, 0, (1, 1)),
            TraceRecord(3.0, "serviceCompletion", 9, 0, 0, 1, (1, 1)),
            TraceRecord(3.0, ADMISSION, 0, 1, 1, 0, (1, 0)),
        ],
    )
    verdict = verify_threshold_trace(trace)
    assert not verdict
    assert verdict.index == 3
    assert "passed over" in verdict.reason


def test_idle_bed_left_unused_is_caught():
    trace = TraceLog(beds=2, thresholds=(0,), records=[TraceRecord(1.0, "arrival", 0, 0, 2, 2, (1,))])
    verdict = verify_threshold_trace(trace)
    assert not verdict
    assert "left waiting" in verdict.reason


def test_calendar_tie_order():
    calendar = EventCalendar()
    calendar.schedule(1.0, EventKind.ARRIVAL, 0)
    calendar.schedule(1.0, EventKind.PATIENCE_EXPIRY, 2)
    calendar.schedule(1.0, EventKind.SERVICE_COMPLETION, 5)
    calendar.schedule(0.5, EventKind.ARRIVAL, 9)
    kinds = [calendar.pop().kind for _ in range(len(calendar))]
    assert kinds == [
        EventKind.ARRIVAL,
        EventKind.SERVICE_COMPLETION,
        EventKind.PATIENCE_EXPIRY,
        EventKind.ARRIVAL,
    ]
    with pytest.raises(InputValidationError):
        calendar.schedule(-1.0, EventKind.ARRIVAL, 1)


def test_youth_wait_is_censored_at_horizon():
    youth = Youth(ident=1, group=0, arrival=350.0, service_days=60.0, patience_days=math.inf)
    assert youth.wait_until(360.0) == pytest.approx(10.0)
    youth.admit(352.0)
    assert youth.outcome is Outcome.SERVED
    assert youth.wait_until(360.0) == pytest.approx(2.0)


def test_config_validation():
    with pytest.raises(InputValidationError):
        _baseline(thresholds=(0, 0, 25))
    with pytest.raises(InputValidationError):
        _baseline(horizon_days=10.0, warmup_days=10.0)
    with pytest.raises(InputValidationError):
        _baseline(initial_occupancy=500)
    with pytest.raises(InputValidationError):
        ScenarioConfig(
            params=SystemParams(2.0, 1.0, 1.0),
            mix=ClassMix.from_rates([1.0, 0.5]),
            beds=3,
            policy=ThresholdPolicy((0, 0)),
        )
