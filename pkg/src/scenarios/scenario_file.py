"""
Scenario files

This module defines the schema of operator scenario files and the loader
that parses and validates them. A scenario file is TOML with the sections:
- [system]: lambda, mu (or mu_preset) and theta; each defaults to the study's rate
- [population]: attribute probabilities or explicit per-group rates
- [capacity]: a bed count, or "auto" with a staffing regime
- [policy]: explicit thresholds, "analytic" or "calibrate"
- [simulation]: horizon, warm-up, replications and base seed
- [qos]: global and per-group caps
- [sweep] and [[variants]]: optional sensitivity grid and compared variants

Unknown keys are rejected. Diagnostics name the offending key and, where it
can be found in the file, its line.
"""

import logging
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import (
    ABANDON_CAPS,
    ABANDONMENT_TARGET,
    ARRIVAL_RATE,
    ATTRIBUTE_PROBABILITIES,
    BASE_SEED,
    CALIBRATION_REPLICATIONS,
    HORIZON_DAYS,
    INITIAL_OCCUPANCY,
    MEAN_WAIT_TARGET,
    PATIENCE_RATE,
    REPLICATIONS,
    SERVICE_RATE_PRESETS,
    WAIT_CAPS,
    WARMUP_DAYS,
)
from src.errors import ScenarioValidationError

logger = logging.getLogger(__name__)

RegimeName = Literal["qd", "ed", "qed", "exact-ab", "exact-wait"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SystemSection(_Section):
    lam: float = Field(default=ARRIVAL_RATE, alias="lambda", gt=0)
    mu: float | None = Field(default=None, gt=0)
    mu_preset: Literal["printed", "sixty-days"] | None = None
    theta: float = Field(default=PATIENCE_RATE, ge=0)

    @model_validator(mode="after")
    def _one_service_rate(self):
        if self.mu is not None and self.mu_preset is not None:
            raise ValueError("give either mu or mu_preset, not both")
        if self.mu is None:
            self.mu = SERVICE_RATE_PRESETS[self.mu_preset or "printed"]
        return self


class PopulationSection(_Section):
    grouping: Literal["table", "rule-order"] = "table"
    ht_victim: float = Field(default=ATTRIBUTE_PROBABILITIES["ht_victim"], ge=0, le=1)
    substance_or_mental_health: float = Field(
        default=ATTRIBUTE_PROBABILITIES["substance_or_mental_health"], ge=0, le=1
    )
    lgbtq: float = Field(default=ATTRIBUTE_PROBABILITIES["lgbtq"], ge=0, le=1)
    welfare_or_justice: float = Field(default=ATTRIBUTE_PROBABILITIES["welfare_or_justice"], ge=0, le=1)
    us_minority: float = Field(default=ATTRIBUTE_PROBABILITIES["us_minority"], ge=0, le=1)
    rates: list[float] | None = None
    labels: list[str] | None = None

    @model_validator(mode="after")
    def _explicit_rates(self):
        if self.rates is not None:
            if not self.rates or any(rate < 0 for rate in self.rates) or sum(self.rates) <= 0:
                raise ValueError("rates must be nonnegative with a positive sum")
            if self.labels is not None and len(self.labels) != len(self.rates):
                raise ValueError("labels and rates must have equal lengths")
        elif self.labels is not None:
            raise ValueError("labels need explicit rates")
        return self

    def attribute_probabilities(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in ATTRIBUTE_PROBABILITIES}


class CapacitySection(_Section):
    beds: int | Literal["auto"] = "auto"
    regime: RegimeName = "qed"
    gamma: float | None = Field(default=None, gt=0, lt=1)

    @field_validator("beds")
    @classmethod
    def _positive(cls, value):
        if value != "auto" and value < 1:
            raise ValueError("beds must be >= 1 or \"auto\"")
        return value


class PolicySection(_Section):
    thresholds: list[int] | Literal["analytic", "calibrate"] = "analytic"
    caps: Literal["wait", "abandon"] = "wait"
    numerator: Literal["wait", "abandon"] = "wait"
    allow_degenerate: bool = True
    max_k: int | None = Field(default=None, ge=0)
    calibration_replications: int = Field(default=CALIBRATION_REPLICATIONS, ge=2)


class SimulationSection(_Section):
    horizon_days: float = Field(default=HORIZON_DAYS, gt=0)
    warmup_days: float = Field(default=WARMUP_DAYS, ge=0)
    initial_occupancy: int = Field(default=INITIAL_OCCUPANCY, ge=0)
    replications: int = Field(default=REPLICATIONS, ge=2)
    base_seed: int = Field(default=BASE_SEED, ge=0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _window(self):
        if not self.horizon_days > self.warmup_days:
            raise ValueError("horizon_days must exceed warmup_days")
        return self


class QosSection(_Section):
    alpha: float = Field(default=ABANDONMENT_TARGET, gt=0, lt=1)
    max_mean_wait: float = Field(default=MEAN_WAIT_TARGET, gt=0)
    wait_caps: list[tuple[float, float]] = Field(default_factory=lambda: [tuple(c) for c in WAIT_CAPS])
    abandon_caps: list[float] = Field(default_factory=lambda: list(ABANDON_CAPS))
    high_risk_abandoned_cap: float | None = Field(default=None, ge=0)

    @field_validator("wait_caps")
    @classmethod
    def _wait_caps(cls, value):
        for fraction, days in value:
            if not 0 < fraction < 1 or not days > 0:
                raise ValueError("each wait cap is [fraction in (0, 1), days > 0]")
        return value

    @field_validator("abandon_caps")
    @classmethod
    def _abandon_caps(cls, value):
        if any(not 0 < alpha < 1 for alpha in value):
            raise ValueError("abandonment caps must lie in (0, 1)")
        return value


class SweepSection(_Section):
    parameter: Literal["lambda", "mu", "theta"]
    values: list[float] | None = None


class VariantSection(_Section):
    name: str
    beds: int | None = Field(default=None, ge=1)
    thresholds: list[int] | Literal["analytic", "calibrate"] | None = None


class ScenarioFile(_Section):
    """Validated contents of one scenario file."""

    name: str = "scenario"
    system: SystemSection
    population: PopulationSection = Field(default_factory=PopulationSection)
    capacity: CapacitySection = Field(default_factory=CapacitySection)
    policy: PolicySection = Field(default_factory=PolicySection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    qos: QosSection = Field(default_factory=QosSection)
    sweep: SweepSection | None = None
    variants: list[VariantSection] = Field(default_factory=list)

    @model_validator(mode="after")
    def _unique_variants(self):
        names = [variant.name for variant in self.variants]
        if len(set(names)) != len(names):
            raise ValueError(f"variant names must be unique, got {names}")
        return self


_TABLE = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_.\-]+)\s*\]\]?")
_KEY = re.compile(r"^\s*\"?([A-Za-z0-9_\-]+)\"?\s*=")
_TOML_LINE = re.compile(r"at line (\d+)")


def locate_key(text: str, loc: tuple) -> int | None:
    """
    1-based line holding the key at pydantic location `loc`.

    Falls back to the line of the enclosing table, or None when the key is
    absent from the file (a missing required key).
    """
    names = [part for part in loc if isinstance(part, str)]
    indices = [part for part in loc if isinstance(part, int)]
    if not names:
        return None
    table_counts: dict[str, int] = {}
    current: tuple[str, int | None] = ("", None)
    table_line = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        table = _TABLE.match(line)
        if table:
            header = table.group(2)
            if table.group(1) == "[[":
                table_counts[header] = table_counts.get(header, -1) + 1
                current = (header, table_counts[header])
            else:
                current = (header, None)
            if current[0] == names[0] and (current[1] is None or current[1] == (indices[:1] or [None])[0]):
                table_line = lineno
                if len(names) == 1:
                    return lineno
            continue
        key = _KEY.match(line)
        if not key:
            continue
        in_table = current[0] == names[0] and (current[1] is None or indices[:1] == [current[1]])
        if len(names) == 1 and current[0] == "" and key.group(1) == names[0]:
            return lineno
        if len(names) >= 2 and in_table and key.group(1) == names[1]:
            return lineno
    return table_line


def _from_validation_error(exc: ValidationError, text: str, path: Path) -> ScenarioValidationError:
    first = exc.errors()[0]
    loc = tuple(first["loc"])
    key = ".".join(str(part) for part in loc) or None
    message = first["msg"].removeprefix("Value error, ")
    return ScenarioValidationError(f"{path}: {message}", key=key, line=locate_key(text, loc))


def parse_scenario_text(text: str, path: Path | str = "<scenario>") -> ScenarioFile:
    """Parse and validate scenario text."""
    path = Path(path)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        found = _TOML_LINE.search(str(exc))
        raise ScenarioValidationError(
            f"{path}: malformed TOML: {exc}", line=int(found.group(1)) if found else None
        ) from exc
    try:
        scenario = ScenarioFile.model_validate(data)
    except ValidationError as exc:
        raise _from_validation_error(exc, text, path) from exc
    logger.debug("parsed scenario %r from %s", scenario.name, path)
    return scenario


def load_scenario_file(path: Path | str) -> ScenarioFile:
    """
    Read a scenario file from disk.

    Args:
        path (Path | str): Location of the TOML file

    Returns:
        ScenarioFile: Validated scenario

    Raises:
        ScenarioValidationError: File missing, malformed or invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioValidationError(f"cannot read scenario file {path}: {exc.strerror}") from exc
    return parse_scenario_text(text, path)
