"""Exception hierarchy.

``ValidationError`` covers bad inputs (the CLI maps these to exit code 2);
``EstimationError`` covers failures that only show up while computing
(exit code 1).
"""

from __future__ import annotations


class HfesError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(HfesError, ValueError):
    pass


class EstimationError(HfesError, RuntimeError):
    pass


class MissingColumn(ValidationError):
    def __init__(self, column: str):
        super().__init__(f"missing column: {column!r}")
        self.column = column


class NonFiniteValue(ValidationError):
    def __init__(self, row: int, column: str, raw: str):
        super().__init__(f"non-finite value {raw!r} in column {column!r} at row {row}")
        self.row = row
        self.column = column


class DuplicateDate(ValidationError):
    def __init__(self, label: str, date):
        super().__init__(f"duplicate date {date} within label {label}")
        self.label = label
        self.date = date


class EmptySample(ValidationError):
    def __init__(self, label: str):
        super().__init__(f"empty sample: {label}")
        self.label = label


class TooFewObservations(ValidationError):
    def __init__(self, needed: int, got: int, what: str = "series"):
        super().__init__(f"{what} needs at least {needed} observations, got {got}")
        self.needed = needed
        self.got = got


class LengthMismatch(ValidationError):
    pass


class DegenerateRegressor(ValidationError):
    pass


class BandwidthTooLarge(ValidationError):
    pass


class SingularSystem(ValidationError):
    pass


class ScheduleTooShort(ValidationError):
    pass


class DegenerateDraws(ValidationError):
    pass


class NegativeDelta(ValidationError):
    pass


class NoLabeledRows(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class NotBracketed(EstimationError):
    """A root search ran off the end of its interval without a crossing."""
