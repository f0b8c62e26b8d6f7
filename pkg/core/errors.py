"""Exception hierarchy shared by every package.

Each error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations

from .enums import ExitCode


class ToolkitError(Exception):
    """Base class for all errors raised by the toolkit."""
    exit_code: ExitCode = ExitCode.FAILURE


class ConfigError(ToolkitError):
    """Invalid configuration, descriptor string or CLI argument."""
    exit_code = ExitCode.CONFIG_ERROR


class DomainError(ToolkitError):
    """Request outside the domain of a construction (e.g. mesh of an empty family)."""
    exit_code = ExitCode.CONFIG_ERROR


class ResourceError(ToolkitError):
    """A configured budget or size limit was exceeded."""
    exit_code = ExitCode.RESOURCE_ERROR


class StructuralError(ToolkitError):
    """Inputs do not fit together (different parent spaces, not a cover, ...)."""
    exit_code = ExitCode.INTEGRITY_ERROR


class IntegrityError(ToolkitError):
    """A certified bound or internal contract failed on actual data."""
    exit_code = ExitCode.INTEGRITY_ERROR
