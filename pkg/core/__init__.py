__version__ = "1.0.0"

from .enums import RunState, StrategyKind, GrowthClass, ExitCode
from .errors import (
    ToolkitError, ConfigError, DomainError, ResourceError,
    StructuralError, IntegrityError,
)
