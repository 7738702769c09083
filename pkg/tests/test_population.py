import itertools

import numpy as np
import pytest

from config import GROUP_LABELS
from src.errors import InputValidationError
from src.population.attributes import (
    AttributeModel,
    ClassMix,
    class_arrival_rates,
    combination_table,
    group_of,
    group_shares,
    sample_group_indices,
    sample_profile,
)

TABLE_SHARES = {"A": 0.20, "B": 0.24, "C": 0.168, "D": 0.05292, "E": 0.2156, "F": 0.12348}
RULE_ORDER_SHARES = {"A": 0.20, "B": 0.24, "C": 0.168, "D": 0.1176, "E": 0.15092, "F": 0.12348}


def test_table_has_every_combination_once():
    table = combination_table()
    flags = table.iloc[:, :5].itertuples(index=False, name=None)
    assert sorted(flags) == sorted(itertools.product((0, 1), repeat=5))
    assert table["percent"].sum() == pytest.approx(100.0, abs=1e-6)


def test_lookup_agrees_with_table_rows():
    for row in combination_table().itertuples(index=False):
        assert group_of(tuple(row[:5])) == row.group


def test_table_percentages_match_independence():
    table = combination_table()
    by_group = table.groupby("group")["percent"].sum() / 100
    for label, share in TABLE_SHARES.items():
        assert by_group[label] == pytest.approx(share, abs=1e-9)


def test_rule_order_differs_on_one_combination():
    differing = [
        flags
        for flags in itertools.product((0, 1), repeat=5)
        if group_of(flags, "table") != group_of(flags, "rule-order")
    ]
    assert differing == [(0, 0, 0, 1, 1)]
    assert group_of((0, 0, 0, 1, 1), "table") == "E"
    assert group_of((0, 0, 0, 1, 1), "rule-order") == "D"


@pytest.mark.parametrize("mode, expected", [("table", TABLE_SHARES), ("rule-order", RULE_ORDER_SHARES)])
def test_group_shares(mode, expected):
    shares = group_shares(AttributeModel(), mode)
    assert list(shares) == list(GROUP_LABELS)
    for label, share in expected.items():
        assert shares[label] == pytest.approx(share, abs=1e-12)


def test_class_arrival_rates():
    mix = class_arrival_rates(4.44, AttributeModel())
    assert mix.total_rate == pytest.approx(4.44)
    assert mix.rates[0] == pytest.approx(0.888)
    assert list(mix.rates) == pytest.approx([0.888, 1.066, 0.746, 0.235, 0.957, 0.548], abs=0.02)
    assert mix.labels == GROUP_LABELS


def test_sampled_shares_approach_exact_shares():
    rng = np.random.default_rng(7)
    groups = sample_group_indices(AttributeModel(), rng, 1_000_000)
    observed = np.bincount(groups, minlength=6) / groups.size
    assert observed.tolist() == pytest.approx([TABLE_SHARES[g] for g in GROUP_LABELS], abs=0.005)


def test_vectorised_sampling_matches_single_draws():
    model = AttributeModel()
    bulk = sample_group_indices(model, np.random.default_rng(11), 50)
    rng = np.random.default_rng(11)
    single = [sample_profile(model, rng).group_index for _ in range(50)]
    assert list(bulk) == single


def test_certain_attributes():
    rng = np.random.default_rng(0)
    model = AttributeModel(0.0, 0.0, 0.0, 0.0, 1.0)
    profile = sample_profile(model, rng)
    assert profile.attributes == (False, False, False, False, True)
    assert profile.group == "E"


def test_attribute_probability_range():
    with pytest.raises(InputValidationError):
        AttributeModel(ht_victim=1.2)
    with pytest.raises(InputValidationError):
        group_of((1, 0, 0))
    with pytest.raises(InputValidationError):
        group_of((1, 0, 0, 0, 0), mode="alphabetical")


def test_explicit_mix():
    mix = ClassMix.from_rates([1.0, 3.0], labels=("high", "low"))
    assert mix.proportions == pytest.approx((0.25, 0.75))
    assert mix.n_groups == 2
    with pytest.raises(InputValidationError):
        ClassMix.from_rates([0.0, 0.0])
    with pytest.raises(InputValidationError):
        ClassMix((0.5, 0.6), (1.0, 1.0), ("a", "b"))
