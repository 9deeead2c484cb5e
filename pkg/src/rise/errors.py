"""Exception hierarchy shared by the analysis core, the store, the service, and the CLI."""

from __future__ import annotations


class RiseError(Exception):
    """Base class for every toolkit error."""


class EmptyInput(RiseError):
    """An operation received an empty collection where at least one element is required."""


class DomainError(RiseError):
    """A value violated its declared domain (probability outside [0,1], non-binary label, ...)."""


class NotSorted(RiseError):
    """A sequence that must be sorted ascending was not (checked in debug mode only)."""


class MissingGroup(RiseError):
    """A group-level computation could not run because one group has no samples."""

    def __init__(self, group: int):
        self.group = group
        super().__init__(f"missing group {group}")


class TooFewPoints(RiseError):
    """A curve is too short for the requested geometric analysis."""


class NonMonotonicInput(RiseError):
    """Knee detection requires strictly increasing x and nondecreasing y."""


class NotDetected(RiseError):
    """A knee marked detected=false was passed where a detected knee is required."""


class EmptyFile(RiseError):
    """A prediction file had no header or no data rows."""


class ParseError(RiseError):
    """A prediction file is structurally malformed at a specific location."""

    def __init__(self, line: int, column: str | None, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        if column:
            super().__init__(f"line {line}, column {column!r}: {reason}")
        else:
            super().__init__(f"line {line}: {reason}")


class ValidationError(RiseError):
    """A parsed value violated a field constraint at a specific location."""

    def __init__(self, line: int, field: str, reason: str):
        self.line = line
        self.field = field
        self.reason = reason
        super().__init__(f"line {line}, field {field!r}: {reason}")


class DuplicateRun(RiseError):
    def __init__(self, run_id: str):
        self.run_id = run_id
        super().__init__(f"run {run_id!r} is already registered")


class UnknownRun(RiseError):
    def __init__(self, run_id: str):
        self.run_id = run_id
        super().__init__(f"unknown run {run_id!r}")


class UnknownAttribute(RiseError):
    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f"unknown attribute {attribute!r}")


class UnknownEnvironment(RiseError):
    def __init__(self, environment: str):
        self.environment = environment
        super().__init__(f"unknown environment {environment!r}")


class StoreCorrupt(RiseError):
    """The on-disk store could not be read back (malformed manifest or sidecar)."""


class PipelineFailure(RiseError):
    """Wraps an error raised inside the report pipeline, naming the stage that failed."""

    def __init__(self, stage: str, error: RiseError):
        self.stage = stage
        self.error = error
        super().__init__(f"pipeline stage {stage!r} failed: {error}")
