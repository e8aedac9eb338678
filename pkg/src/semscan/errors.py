"""Exception types shared across the package."""

from __future__ import annotations


class InputError(ValueError):
    """Caller handed us data that violates a documented precondition."""


class DegenerateGeometryError(InputError):
    """Geometry collapsed to nothing usable (e.g. head inside a point box)."""


class ParseError(ValueError):
    """Malformed text input; carries 1-based line/column of the offence."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
