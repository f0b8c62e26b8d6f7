"""Enumerations for run states, strategies, growth classes and exit codes."""

from enum import Enum, IntEnum, auto


class RunState(Enum):
    """Top-level experiment lifecycle states."""
    IDLE = auto()
    RUNNING = auto()
    COMPLETED = auto()
    FAILED = auto()


class StrategyKind(Enum):
    """Ways of producing an (R, n)-decomposition."""
    GREEDY = "greedy"
    GRID = "grid"
    EXACT = "exact"

    @classmethod
    def from_string(cls, name: str) -> "StrategyKind":
        """Convert string to StrategyKind (case-insensitive, 'greedy-carve' accepted)."""
        name = name.lower().strip()
        if name == "greedy-carve":
            name = "greedy"
        return cls(name)


class GrowthClass(Enum):
    """Closed-form growth classes plus sampled data."""
    CONSTANT = "const"
    POLYNOMIAL = "poly"
    EXPONENTIAL = "exp"
    TABULATED = "table"


class ExitCode(IntEnum):
    """Process exit codes of the CLI."""
    OK = 0
    FAILURE = 1
    CONFIG_ERROR = 2
    RESOURCE_ERROR = 3
    INTEGRITY_ERROR = 4
