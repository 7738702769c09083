"""
Analyzer Configuration - All constants and data paths

This module contains all analyzer configuration constants including:
- Baseline shelter rates (arrivals, length of stay, patience)
- Vulnerability groups and attribute probabilities
- Quality-of-service targets used by the scenario files
- Numerical tolerances for the Erlang-A and threshold computations
- Simulation and replication defaults
- Output locations and exit codes
"""

from pathlib import Path

# Repository locations
PROJECT_ROOT = Path(__file__).resolve().parent
COMBINATION_TABLE_PATH = PROJECT_ROOT / "src" / "population" / "combination_table.csv"
SCENARIO_DIR = PROJECT_ROOT / "scenarios"

# Baseline shelter rates (per day)
ARRIVALS_PER_YEAR = 1600  # Youth arriving to the shelter each year
DAYS_PER_YEAR = 360  # Year length in days
ARRIVAL_RATE = round(ARRIVALS_PER_YEAR / DAYS_PER_YEAR, 2)  # lambda = 4.44
SERVICE_RATE = 0.016  # mu, about 62.5 days per stay
SERVICE_RATE_SIXTY_DAYS = 1 / 60  # mu for a 60-day average stay
SERVICE_RATE_PRESETS = {
    "printed": SERVICE_RATE,
    "sixty-days": SERVICE_RATE_SIXTY_DAYS,
}
PATIENCE_RATE = 0.5  # theta, mean patience of 2 days

# Vulnerability groups, highest priority first
GROUP_LABELS = ("A", "B", "C", "D", "E", "F")
HIGH_RISK_GROUPS = ("A", "B", "C", "D", "E")  # Groups counted as high-risk abandoners

# Independent attribute probabilities, most to least impactful
ATTRIBUTE_NAMES = (
    "ht_victim",
    "substance_or_mental_health",
    "lgbtq",
    "welfare_or_justice",
    "us_minority",
)
ATTRIBUTE_PROBABILITIES = {
    "ht_victim": 0.20,
    "substance_or_mental_health": 0.30,
    "lgbtq": 0.30,
    "welfare_or_justice": 0.30,
    "us_minority": 0.55,
}

# Global quality-of-service targets
ABANDONMENT_TARGET = 0.04  # alpha, cap on P{Ab}
MEAN_WAIT_TARGET = 1.0  # M, cap on E[W] in days

# Per-class caps for groups A-E (group F has none)
WAIT_CAPS = (  # (x_j, T_j days): P{W_j >= T_j} <= x_j
    (0.05, 1.0),
    (0.08, 1.0),
    (0.05, 2.0),
    (0.10, 2.0),
    (0.15, 2.0),
)
ABANDON_CAPS = (0.05, 0.08, 0.10, 0.12, 0.15)  # alpha_j: P_j{Ab} <= alpha_j
ABANDON_CAP_DAYS = 1.0  # T_j used by the abandonment-cap threshold recursion

# Erlang-A numerics
TAIL_EPS = 1e-12  # Residual tail mass allowed by truncation
TRUNCATION_SIGMA = 20.0  # Minimum truncation width in Gaussian scales
CLAMP_TOLERANCE = 1e-9  # Closed-form excursions clamped to [0, 1] within this
BETA_BRACKET = (-10.0, 10.0)  # Initial bracket for the beta* root
BETA_BRACKET_LIMIT = 1e3  # Expansion stops once the bracket reaches this width
BETA_XTOL = 1e-14  # Root tolerance on beta
STAFFING_SEARCH_LIMIT = 1_000_000  # Upper bound for exact bed searches

# Threshold numerics
DEGENERACY_EPS = 0.01  # sigma values >= 1 - eps are clamped
CEIL_TOLERANCE = 1e-9  # Guard against ceil(2.0000000001) == 3

# Simulation defaults
HORIZON_DAYS = float(DAYS_PER_YEAR)  # One year
WARMUP_DAYS = 0.0  # Yearly figures start from an empty shelter
INITIAL_OCCUPANCY = 0  # Shelter starts empty
REPLICATIONS = 100  # Replications per experiment
BASE_SEED = 20220601  # Root of the replication seed ladder
CALIBRATION_REPLICATIONS = 20  # Replications per calibration trial
CONFIDENCE_Z = 1.96  # Normal quantile for 95% intervals

# Sensitivity grids
SWEEP_GRIDS = {
    "lambda": (3.55, 4.00, 4.44, 4.88, 5.33),
    "mu": (0.014, 0.015, 0.016, 0.018, 0.021),
    "theta": (0.0, 0.33, 0.5, 1.0),
}

# Output
OUTPUT_DIR_ENV = "SHELTERQ_OUTPUT_DIR"  # Environment variable for the default output directory
DEFAULT_OUTPUT_DIR = "results"
OUTPUT_FORMATS = ("csv", "structured")

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4
