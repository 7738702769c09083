"""
Scenario resolution

This module turns a validated ScenarioFile into the objects the analysis
modules work with: rates, the group mix, QoS targets, the bed count (staffed
when the file says "auto"), the threshold policy and simulation configs for
the base scenario and each variant.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

from src.errors import InputValidationError
from src.experiments.calibration import calibrate_thresholds_by_simulation
from src.experiments.sweeps import SweepSpec
from src.population.attributes import AttributeModel, ClassMix, class_arrival_rates
from src.queueing.erlang import SystemParams, erlang_a_metrics
from src.queueing.staffing import (
    QosTargets,
    StaffingResult,
    WaitCap,
    min_beds_for_abandonment,
    min_beds_for_wait,
    staff_ed,
    staff_qd,
    staff_qed,
)
from src.queueing.thresholds import (
    ThresholdPolicy,
    cumulative_loads,
    thresholds_for_abandon_caps,
    thresholds_for_wait_caps,
)
from src.scenarios.scenario_file import ScenarioFile, load_scenario_file
from src.simulation.shelter import ScenarioConfig

logger = logging.getLogger(__name__)

POLICY_MODES = ("explicit", "analytic", "calibrate")


@dataclass
class Scenario:
    """A scenario file with its derived objects."""

    spec: ScenarioFile
    _policies: dict[tuple[int, str], ThresholdPolicy] = field(default_factory=dict, repr=False)

    @classmethod
    def load(cls, path) -> "Scenario":
        return cls(load_scenario_file(path))

    @property
    def name(self) -> str:
        return self.spec.name

    @cached_property
    def params(self) -> SystemParams:
        system = self.spec.system
        return SystemParams(system.lam, system.mu, system.theta)

    @cached_property
    def mix(self) -> AttributeModel | ClassMix:
        population = self.spec.population
        if population.rates is None:
            return AttributeModel(**population.attribute_probabilities())
        if population.labels is not None:
            mix = ClassMix.from_rates(population.rates, population.labels)
        else:
            mix = ClassMix.from_rates(population.rates, [chr(ord("A") + j) for j in range(len(population.rates))])
        if abs(mix.total_rate - self.params.lam) > 1e-9 * self.params.lam:
            raise InputValidationError(
                f"population rates sum to {mix.total_rate:g} but system lambda is {self.params.lam:g}"
            )
        return mix

    @cached_property
    def class_mix(self) -> ClassMix:
        if isinstance(self.mix, ClassMix):
            return self.mix
        return class_arrival_rates(self.params.lam, self.mix, self.spec.population.grouping)

    @property
    def n_groups(self) -> int:
        return self.class_mix.n_groups

    @cached_property
    def qos(self) -> QosTargets:
        qos = self.spec.qos
        return QosTargets(
            alpha_global=qos.alpha,
            max_mean_wait=qos.max_mean_wait,
            wait_caps=tuple(WaitCap(fraction, days) for fraction, days in qos.wait_caps),
            abandon_caps=tuple(qos.abandon_caps),
            high_risk_abandoned_cap=qos.high_risk_abandoned_cap,
        )

    # Capacity

    def staff(self, regime: str | None = None) -> StaffingResult:
        """Bed recommendation for a regime; the file's regime by default."""
        regime = regime or self.spec.capacity.regime
        gamma = self.spec.capacity.gamma or self.qos.alpha_global
        if regime == "qd":
            return staff_qd(self.params, gamma)
        if regime == "ed":
            return staff_ed(self.params, gamma)
        if regime == "qed":
            return staff_qed(gamma, self.params)
        if regime == "exact-ab":
            return min_beds_for_abandonment(self.params, self.qos.alpha_global)
        if regime == "exact-wait":
            return min_beds_for_wait(self.params, self.qos.max_mean_wait)
        raise InputValidationError(f"unknown staffing regime {regime!r}")

    @cached_property
    def beds(self) -> int:
        beds = self.spec.capacity.beds
        if beds == "auto":
            result = self.staff()
            logger.info("staffed %d beds (%s)", result.beds, result.regime.value)
            return result.beds
        return beds

    # Policy

    def analytic_policy(self, beds: int | None = None) -> ThresholdPolicy:
        """Thresholds from the analytic recursion at `beds` (the scenario's N by default)."""
        beds = beds or self.beds
        rates = self.class_mix.rates
        loads = cumulative_loads(rates, beds, self.params.mu)
        p_wait_lowest = erlang_a_metrics(beds, self.params).p_wait
        policy_spec = self.spec.policy
        self.qos.check_groups(len(rates))
        if policy_spec.caps == "abandon":
            return thresholds_for_abandon_caps(
                loads, self.qos.abandon_caps, self.params.theta, p_wait_lowest,
                allow_degenerate=policy_spec.allow_degenerate,
            )
        return thresholds_for_wait_caps(
            loads,
            self.qos.wait_caps,
            p_wait_lowest,
            numerator=policy_spec.numerator,
            abandon_caps=self.qos.abandon_caps,
            allow_degenerate=policy_spec.allow_degenerate,
        )

    def calibrated_policy(self, beds: int | None = None, reps: int | None = None) -> ThresholdPolicy:
        beds = beds or self.beds
        base = self.base_config(beds=beds, policy=ThresholdPolicy.zeros(self.n_groups))
        simulation = self.spec.simulation
        return calibrate_thresholds_by_simulation(
            base,
            self.qos,
            max_k=self.spec.policy.max_k if self.spec.policy.max_k is not None else beds,
            reps=reps or self.spec.policy.calibration_replications,
            base_seed=simulation.base_seed,
            workers=simulation.workers,
        )

    def policy(self, mode: str | None = None, beds: int | None = None, thresholds=None) -> ThresholdPolicy:
        """
        Resolve thresholds.

        Args:
            mode (str): "explicit", "analytic" or "calibrate"; the file decides when omitted
            beds (int): Bed count the thresholds are computed for
            thresholds: Explicit list or policy keyword overriding the file's
        """
        beds = beds or self.beds
        setting = self.spec.policy.thresholds if thresholds is None else thresholds
        if mode is None:
            mode = "explicit" if isinstance(setting, list) else setting
        if mode not in POLICY_MODES:
            raise InputValidationError(f"policy mode must be one of {POLICY_MODES}, got {mode!r}")
        key = (beds, mode if mode != "explicit" else repr(setting))
        if key not in self._policies:
            if mode == "explicit":
                if not isinstance(setting, list):
                    raise InputValidationError("explicit policy mode needs a thresholds list")
                self._policies[key] = ThresholdPolicy(tuple(setting))
            elif mode == "analytic":
                self._policies[key] = self.analytic_policy(beds)
            else:
                self._policies[key] = self.calibrated_policy(beds)
        return self._policies[key]

    # Simulation

    def base_config(self, **overrides) -> ScenarioConfig:
        simulation = self.spec.simulation
        values = {
            "params": self.params,
            "mix": self.mix,
            "grouping_mode": self.spec.population.grouping,
            "horizon_days": simulation.horizon_days,
            "warmup_days": simulation.warmup_days,
            "initial_occupancy": simulation.initial_occupancy,
            "name": self.name,
        }
        values.update(overrides)
        if "beds" not in values:
            values["beds"] = self.beds
        if "policy" not in values:
            values["policy"] = self.policy(beds=values["beds"])
        return ScenarioConfig(**values)

    def configs(self) -> list[ScenarioConfig]:
        """The base scenario, or one config per variant when variants exist."""
        if not self.spec.variants:
            return [self.base_config()]
        configs = []
        for variant in self.spec.variants:
            beds = variant.beds or self.beds
            policy = self.policy(beds=beds, thresholds=variant.thresholds)
            configs.append(self.base_config(beds=beds, policy=policy, name=variant.name))
        return configs

    def sweep_spec(self, parameter: str | None = None, values: list[float] | None = None) -> SweepSpec:
        """Sweep grid: explicit arguments, then the file's [sweep], then the default grid."""
        section = self.spec.sweep
        parameter = parameter or (section.parameter if section else None)
        if parameter is None:
            raise InputValidationError("no sweep parameter given on the command line or in [sweep]")
        if values:
            return SweepSpec(parameter, tuple(values))
        if section is not None and section.parameter == parameter and section.values:
            return SweepSpec(parameter, tuple(section.values))
        return SweepSpec.default(parameter)
