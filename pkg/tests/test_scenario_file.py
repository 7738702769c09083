import pytest

from config import ARRIVAL_RATE, PATIENCE_RATE, SCENARIO_DIR, SERVICE_RATE, SERVICE_RATE_SIXTY_DAYS
from src.errors import ScenarioValidationError
from src.scenarios.scenario_file import load_scenario_file, locate_key, parse_scenario_text

MINIMAL = """\
[system]
lambda = 4.44
theta = 0.5
"""


def test_minimal_file_uses_defaults():
    spec = parse_scenario_text(MINIMAL)
    assert spec.system.lam == 4.44
    assert spec.system.mu == SERVICE_RATE
    assert spec.capacity.beds == "auto"
    assert spec.policy.thresholds == "analytic"
    assert spec.simulation.replications == 100
    assert spec.variants == []


def test_empty_system_section_uses_study_rates():
    spec = parse_scenario_text("[system]\n")
    assert spec.system.lam == ARRIVAL_RATE == 4.44
    assert spec.system.theta == PATIENCE_RATE


def test_service_rate_preset():
    spec = parse_scenario_text(MINIMAL + 'mu_preset = "sixty-days"\n')
    assert spec.system.mu == pytest.approx(SERVICE_RATE_SIXTY_DAYS)


def test_unknown_key_is_named_with_its_line():
    with pytest.raises(ScenarioValidationError) as caught:
        parse_scenario_text(MINIMAL + "speed = 3\n")
    assert caught.value.key == "system.speed"
    assert caught.value.line == 4
    assert "system.speed" in str(caught.value)


def test_invalid_value_in_later_table():
    text = MINIMAL + "\n[simulation]\nhorizon_days = 360\nreplications = 1\n"
    with pytest.raises(ScenarioValidationError) as caught:
        parse_scenario_text(text)
    assert caught.value.key == "simulation.replications"
    assert caught.value.line == 7


def test_negative_arrival_rate_uses_file_spelling():
    with pytest.raises(ScenarioValidationError) as caught:
        parse_scenario_text("[system]\nlambda = -1\ntheta = 0.5\n")
    assert caught.value.key == "system.lambda"
    assert caught.value.line == 2


def test_missing_section():
    with pytest.raises(ScenarioValidationError) as caught:
        parse_scenario_text('name = "empty"\n')
    assert caught.value.key == "system"


def test_malformed_toml_reports_line():
    with pytest.raises(ScenarioValidationError, match="malformed TOML") as caught:
        parse_scenario_text("[system\nlambda = 1\n")
    assert caught.value.line == 1


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioValidationError, match="cannot read"):
        load_scenario_file(tmp_path / "absent.toml")


@pytest.mark.parametrize(
    "extra",
    [
        'mu = 0.02\nmu_preset = "printed"\n',
        "\n[simulation]\nhorizon_days = 10\nwarmup_days = 20\n",
        "\n[qos]\nwait_caps = [[1.5, 1.0]]\n",
        '\n[policy]\nthresholds = "sometimes"\n',
        '\n[[variants]]\nname = "a"\n\n[[variants]]\nname = "a"\n',
        "\n[population]\nlabels = [\"x\"]\n",
    ],
)
def test_invalid_sections(extra):
    with pytest.raises(ScenarioValidationError):
        parse_scenario_text(MINIMAL + extra)


def test_variant_keys_are_located():
    text = MINIMAL + '\n[[variants]]\nname = "a"\n\n[[variants]]\nname = "b"\nbeds = 0\n'
    with pytest.raises(ScenarioValidationError) as caught:
        parse_scenario_text(text)
    assert caught.value.key == "variants.1.beds"
    assert caught.value.line == 10


def test_locate_key_falls_back_to_table():
    assert locate_key("[qos]\nalpha = 0.1\n", ("qos", "wait_caps", 0)) == 1
    assert locate_key("[qos]\n", ("system",)) is None


@pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_scenarios_parse(path):
    spec = load_scenario_file(path)
    assert spec.system.lam == pytest.approx(4.44)
