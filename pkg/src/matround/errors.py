"""Exception hierarchy shared by all modules."""


def _locate(message, row, col):
    if row is not None and col is not None:
        return f"row {row} column {col}: {message}"
    if row is not None:
        return f"row {row}: {message}"
    return message


class RoundingError(Exception):
    """Base class for everything raised by matround."""


class ParseError(RoundingError, ValueError):
    """Malformed numeric literal, optionally tied to a 1-based matrix cell."""

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        super().__init__(_locate(message, row, col))


class DomainError(RoundingError, ValueError):
    """Value outside the range an operation accepts (negative, >= 1, ...)."""

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        super().__init__(_locate(message, row, col))


class BoundViolation(RoundingError):
    """A certified error bound failed. Always indicates a bug, never bad input."""

    def __init__(self, message, verdicts=()):
        self.verdicts = list(verdicts)
        super().__init__(message)


class InvariantError(RoundingError, AssertionError):
    """Internal invariant broken (odd cycle, inconsistent corner, ...)."""
