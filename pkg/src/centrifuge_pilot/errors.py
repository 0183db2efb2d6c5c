"""Exception types raised across the package."""


class CentrifugePilotError(Exception):
    """Base class for all package errors."""


class ParameterError(CentrifugePilotError, ValueError):
    """An operation parameter violates its contract."""


class ConfigError(ParameterError):
    """A configuration value is inconsistent with its invariants."""


class DegenerateInputError(CentrifugePilotError, ValueError):
    """Input geometry is degenerate (e.g. coincident points)."""


class OutOfWorkspaceError(CentrifugePilotError, ValueError):
    """A pose lies outside the configured gantry workspace."""


class ConsistencyError(CentrifugePilotError, AssertionError):
    """An internal invariant was violated."""
