"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent user input (shapes, ranges, file contents)."""


class ParseError(InputError):
    """A data file could not be parsed.

    ``row`` and ``column`` locate the offending cell when known. Rows are
    counted from 1 with the header as row 1.
    """

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class StabilityError(ArithmeticError):
    """A numerically singular system or a dependent greedy point."""
