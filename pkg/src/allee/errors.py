"""Exception hierarchy.

Configuration problems and numerical failures are kept apart so the CLI can
map them to distinct exit codes.
"""


class AlleeError(Exception):
    """Base class for all package errors."""


class ConfigError(AlleeError, ValueError):
    """Invalid or unparseable experiment configuration (CLI exit code 2)."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NumericalError(AlleeError, RuntimeError):
    """A solver could not produce a trustworthy result (CLI exit code 3)."""


class NoBracketError(NumericalError):
    """No sign change was found for a 1-D root search."""


class ConvergenceError(NumericalError):
    """Iterative solver hit its iteration cap."""


class InstabilityError(NumericalError):
    """Time stepping blew up or lost positivity."""


class StepSizeError(NumericalError, ValueError):
    """Requested time step violates a method constraint."""
