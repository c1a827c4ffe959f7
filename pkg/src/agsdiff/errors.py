"""Exception hierarchy shared by all agsdiff modules."""

from __future__ import annotations


class AgsDiffError(Exception):
    """Base class for every error raised by this package."""


class WellFormednessViolation(AgsDiffError):
    """An attribute set carries the same key more than once."""


class ParseError(AgsDiffError):
    """Malformed serialized input."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", column {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class RuleParseError(ParseError):
    """Malformed line in an ignore-rule file."""


class SnapshotParseError(ParseError):
    """Malformed GUI snapshot file."""


class ConfigParseError(ParseError):
    """Malformed suite configuration file."""


class EmptyKeyConfig(AgsDiffError):
    """Match scoring was asked to average over an empty key set."""


class StoreError(AgsDiffError):
    """Base class for golden-master store failures."""


class StoreIOError(StoreError):
    """Underlying filesystem operation failed."""


class CorruptGoldenMaster(StoreError):
    """A stored golden master exists but cannot be parsed."""


class UnknownStep(StoreError):
    """No golden master recorded for the addressed test step."""


class UnknownElement(StoreError):
    """No element with the given handle exists in the addressed state."""


class SuiteLocked(StoreError):
    """The suite's writer lock is held by someone else."""


class UnknownTarget(AgsDiffError):
    """A mutation addresses a node that does not exist in the page."""


class OrphanWarning(Warning):
    """A snapshot node's direct parent path is missing from the snapshot."""
