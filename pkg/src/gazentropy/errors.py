"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: input problems (``ParseError``,
``ValidationError``) exit with 2, ``ComputationError`` with 3.
"""


class GazeError(Exception):
    """Base class for all package errors."""


class ParseError(GazeError, ValueError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(GazeError, ValueError):
    """Well-formed input that violates a domain invariant."""


class ComputationError(GazeError, ArithmeticError):
    """A metric or statistic is undefined for the given data."""
