"""
Vulnerability attributes and group membership

This module defines:
- AttributeModel, the probabilities of the five independent risk attributes
- VulnerabilityProfile, one youth's attribute vector and vulnerability group
- ClassMix, the per-group proportions and arrival rates
- The 32-row combination table that maps attribute vectors to groups

The combination table shipped next to this module is authoritative. The
sequential conditions (HT victim first, then substance use or mental health,
LGBTQ+, welfare or justice involvement, US minority) are available as the
"rule-order" mode; they disagree with the table on (0,0,0,1,1), which the
table files under E.
"""

import functools
import itertools
import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np
import pandas as pd

from config import ATTRIBUTE_NAMES, ATTRIBUTE_PROBABILITIES, COMBINATION_TABLE_PATH, GROUP_LABELS
from src.errors import InputValidationError

GROUPING_MODES = ("table", "rule-order")


@dataclass(frozen=True)
class AttributeModel:
    """
    Probability that an arriving youth carries each attribute.

    Args:
        ht_victim (float): Previously experienced human trafficking
        substance_or_mental_health (float): Substance use or mental health problems
        lgbtq (float): Identifies as LGBTQ+
        welfare_or_justice (float): Child welfare or juvenile justice involvement
        us_minority (float): Racial or ethnic US minority
    """

    ht_victim: float = ATTRIBUTE_PROBABILITIES["ht_victim"]
    substance_or_mental_health: float = ATTRIBUTE_PROBABILITIES["substance_or_mental_health"]
    lgbtq: float = ATTRIBUTE_PROBABILITIES["lgbtq"]
    welfare_or_justice: float = ATTRIBUTE_PROBABILITIES["welfare_or_justice"]
    us_minority: float = ATTRIBUTE_PROBABILITIES["us_minority"]

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise InputValidationError(f"{item.name} probability must lie in [0, 1], got {value!r}")

    def as_array(self) -> np.ndarray:
        """Probabilities in ATTRIBUTE_NAMES order."""
        return np.array([getattr(self, name) for name in ATTRIBUTE_NAMES], dtype=float)


@dataclass(frozen=True)
class VulnerabilityProfile:
    """Attribute vector of one youth with the group it maps to."""

    attributes: tuple[bool, ...]
    group: str

    @property
    def group_index(self) -> int:
        return GROUP_LABELS.index(self.group)


@dataclass(frozen=True)
class ClassMix:
    """
    Per-group arrival mix, highest priority first.

    Args:
        proportions (tuple): Share of arrivals in each group, summing to 1
        rates (tuple): lambda_j = proportion_j * lambda
        labels (tuple): Group labels
    """

    proportions: tuple[float, ...]
    rates: tuple[float, ...]
    labels: tuple[str, ...] = GROUP_LABELS

    def __post_init__(self):
        if not len(self.proportions) == len(self.rates) == len(self.labels):
            raise InputValidationError("proportions, rates and labels must have equal lengths")
        if any(p < 0 for p in self.proportions) or abs(sum(self.proportions) - 1.0) > 1e-9:
            raise InputValidationError(f"group proportions must be >= 0 and sum to 1, got {self.proportions}")
        if any(rate < 0 for rate in self.rates):
            raise InputValidationError(f"group arrival rates must be >= 0, got {self.rates}")

    @classmethod
    def from_rates(cls, rates: Sequence[float], labels: Sequence[str] = GROUP_LABELS) -> "ClassMix":
        """Mix given explicit per-group rates."""
        total = float(sum(rates))
        if not total > 0:
            raise InputValidationError(f"explicit group rates must have a positive sum, got {list(rates)}")
        return cls(tuple(rate / total for rate in rates), tuple(float(r) for r in rates), tuple(labels))

    @property
    def total_rate(self) -> float:
        return float(sum(self.rates))

    @property
    def n_groups(self) -> int:
        return len(self.labels)


@functools.lru_cache(maxsize=1)
def _load_table() -> pd.DataFrame:
    table = pd.read_csv(COMBINATION_TABLE_PATH, dtype={"group": str})
    if len(table) != 2 ** len(ATTRIBUTE_NAMES):
        raise InputValidationError(f"{COMBINATION_TABLE_PATH.name} must hold 32 rows, found {len(table)}")
    return table


def combination_table() -> pd.DataFrame:
    """The 32 attribute combinations with their group and stored baseline percent."""
    return _load_table().copy()


@functools.lru_cache(maxsize=1)
def _table_lookup() -> dict[tuple[int, ...], str]:
    table = _load_table()
    keys = table[list(ATTRIBUTE_NAMES)].itertuples(index=False, name=None)
    return {tuple(int(flag) for flag in key): group for key, group in zip(keys, table["group"])}


def _rule_order_group(flags: tuple[int, ...]) -> str:
    # First attribute present decides; none present means F
    for flag, label in zip(flags, GROUP_LABELS):
        if flag:
            return label
    return GROUP_LABELS[-1]


def _flags(attributes: Sequence[bool]) -> tuple[int, ...]:
    if len(attributes) != len(ATTRIBUTE_NAMES):
        raise InputValidationError(
            f"expected {len(ATTRIBUTE_NAMES)} attribute flags, got {len(attributes)}"
        )
    return tuple(int(bool(flag)) for flag in attributes)


def group_of(attributes: Sequence[bool], mode: str = "table") -> str:
    """
    Vulnerability group of an attribute vector.

    Args:
        attributes (Sequence[bool]): Flags in ATTRIBUTE_NAMES order
        mode (str): "table" for the combination table, "rule-order" for
            the sequential conditions

    Returns:
        str: Group label A-F
    """
    flags = _flags(attributes)
    if mode == "table":
        return _table_lookup()[flags]
    if mode == "rule-order":
        return _rule_order_group(flags)
    raise InputValidationError(f"grouping mode must be one of {GROUPING_MODES}, got {mode!r}")


@functools.lru_cache(maxsize=2)
def _code_to_group_index(mode: str) -> np.ndarray:
    """Group index for each attribute vector read as a 5-bit code, first flag most significant."""
    width = len(ATTRIBUTE_NAMES)
    lookup = np.empty(2**width, dtype=np.int64)
    for flags in itertools.product((0, 1), repeat=width):
        code = int("".join(map(str, flags)), 2)
        lookup[code] = GROUP_LABELS.index(group_of(flags, mode))
    return lookup


def _bit_weights() -> np.ndarray:
    return 2 ** np.arange(len(ATTRIBUTE_NAMES) - 1, -1, -1)


def sample_profile(
    model: AttributeModel, rng: np.random.Generator, mode: str = "table"
) -> VulnerabilityProfile:
    """Draw the five attributes independently and look up the group."""
    flags = rng.random(len(ATTRIBUTE_NAMES)) < model.as_array()
    code = int(flags.astype(np.int64) @ _bit_weights())
    group = GROUP_LABELS[_code_to_group_index(mode)[code]]
    return VulnerabilityProfile(tuple(bool(flag) for flag in flags), group)


def sample_group_indices(
    model: AttributeModel, rng: np.random.Generator, size: int, mode: str = "table"
) -> np.ndarray:
    """Group indices of `size` youth; row i consumes the same draws sample_profile would."""
    flags = rng.random((size, len(ATTRIBUTE_NAMES))) < model.as_array()
    return _code_to_group_index(mode)[flags.astype(np.int64) @ _bit_weights()]


def group_shares(model: AttributeModel, mode: str = "table") -> dict[str, float]:
    """
    Exact proportion of arrivals in each group under independence.

    Returns:
        dict: Share per group label, summing to 1
    """
    probabilities = model.as_array()
    shares = dict.fromkeys(GROUP_LABELS, 0.0)
    for flags in itertools.product((0, 1), repeat=len(ATTRIBUTE_NAMES)):
        weight = float(np.prod(np.where(np.array(flags) == 1, probabilities, 1.0 - probabilities)))
        shares[group_of(flags, mode)] += weight
    return shares


def class_arrival_rates(lam: float, model: AttributeModel, mode: str = "table") -> ClassMix:
    """
    Per-group arrival rates lambda_j = share_j * lambda.

    Args:
        lam (float): Aggregate arrival rate, > 0
        model (AttributeModel): Attribute probabilities
        mode (str): Grouping mode

    Returns:
        ClassMix: Proportions and rates in priority order
    """
    if not (math.isfinite(lam) and lam > 0):
        raise InputValidationError(f"lambda must be finite and > 0, got {lam!r}")
    shares = group_shares(model, mode)
    proportions = tuple(shares[label] for label in GROUP_LABELS)
    return ClassMix(proportions, tuple(share * lam for share in proportions))
