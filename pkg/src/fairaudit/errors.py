"""Exception types shared across the toolkit.

Every error raised on purpose derives from FairauditError so callers can
catch toolkit failures without swallowing programming mistakes. The CLI maps
ConfigError to exit code 2 and every other FairauditError to exit code 1.
"""

from __future__ import annotations


class FairauditError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FairauditError):
    """Bad configuration or usage: wrong file, invalid option value."""


class SchemaError(FairauditError):
    """Schema construction or CSV header mismatch."""


class ParseError(FairauditError):
    """A cell failed to parse; message names the row and column."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(FairauditError):
    """A file or table with no data rows."""


class TooSmallError(FairauditError):
    """Dataset below the minimum size an operation needs."""


class DegenerateTrainingError(FairauditError):
    """Training data contains a single class."""


class InvalidInputError(FairauditError):
    """Non-finite values or otherwise unusable numeric input."""


class DimensionError(FairauditError):
    """Row or matrix width does not match the model/dataset dimension."""


class EmptyGroupError(FairauditError):
    """A protected group has no members, so its rates are undefined."""


class UndefinedMetricError(FairauditError):
    """A rate has a zero denominator; message names the rate and group."""

    def __init__(self, rate: str, group: str):
        super().__init__(f"{rate} undefined for {group} group (zero denominator)")
        self.rate = rate
        self.group = group


class InsufficientPositivesError(FairauditError):
    """Fewer positive-label training rows than the requested k."""


class InvalidArgumentError(FairauditError):
    """An argument violates a documented precondition."""


class LedgerError(FairauditError):
    """Decision ledger inconsistency, e.g. accepting without a proposal."""


class NotFoundError(FairauditError):
    """A row id or resource that does not exist."""
