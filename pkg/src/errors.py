"""
Error types shared by every analyzer module

Each error carries the process exit code the command line reports for it:
- 2 for invalid inputs and scenario files
- 3 when no policy satisfies the requested caps
- 4 when two computations of the same quantity disagree
"""

from config import EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_VALIDATION


class ShelterQueueError(Exception):
    """Base error for the analyzer."""

    exit_code = EXIT_VALIDATION


class InputValidationError(ShelterQueueError, ValueError):
    """Inputs violate an operation's domain."""


class UnstableWithoutAbandonmentError(InputValidationError):
    """No stationary distribution exists: theta = 0 and lambda >= N * mu."""

    def __init__(self, beds: int, lam: float, mu: float):
        super().__init__(
            f"unstable-without-abandonment: lambda={lam:g} >= N*mu={beds * mu:g} "
            f"with theta=0 (N={beds})"
        )
        self.beds = beds


class NumericalInconsistencyError(ShelterQueueError, FloatingPointError):
    """A computed quantity left its admissible range."""

    exit_code = EXIT_NUMERICAL


class NoRootInBracketError(NumericalInconsistencyError):
    """The beta* equation did not change sign over the expanded bracket."""


class DegenerateLoadError(ShelterQueueError):
    """A cumulative load sigma reached 1 and no fallback was allowed."""

    exit_code = EXIT_NUMERICAL


class InfeasibleError(ShelterQueueError):
    """Caps cannot be met within the allowed search range."""

    exit_code = EXIT_INFEASIBLE


class ScenarioValidationError(InputValidationError):
    """
    A scenario file could not be parsed or validated.

    Args:
        message (str): Human readable diagnostic
        key (str): Dotted path of the offending key, if known
        line (int): 1-based line number in the scenario file, if known
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        location = ""
        if key is not None:
            location += f" [{key}]"
        if line is not None:
            location += f" (line {line})"
        super().__init__(f"{message}{location}")
        self.key = key
        self.line = line
