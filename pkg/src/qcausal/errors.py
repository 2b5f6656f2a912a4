"""Shared exception types.

Configuration problems (bad files, bad CLI values, inconsistent parameters)
raise ConfigError; violations of internal model invariants raise
InvariantViolation.  The CLI maps these to distinct exit codes.
"""


class ConfigError(ValueError):
    """A configuration value or file is invalid.  Message names the field."""


class ParseError(ConfigError):
    """A text input failed to parse.  Carries a 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", col {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class InvariantViolation(RuntimeError):
    """An internal model invariant was broken during a run."""


class DegenerateObjectError(InvariantViolation):
    """An operation would leave a quantum object with no usable paths."""


class UnknownObjectError(KeyError):
    """An object id was not found in the system state."""
