"""Exception types shared across the package."""

from __future__ import annotations


class TracefitError(Exception):
    """Base class for all errors raised by tracefit."""


class DomainViolation(TracefitError):
    """A curve was evaluated outside the region where it is finite."""

    def __init__(self, model: str, x: float, subexpression: str):
        self.model = model
        self.x = x
        self.subexpression = subexpression
        super().__init__(f"{model}: {subexpression} out of domain at x={x!r}")


class InsufficientData(TracefitError):
    """Too few observations (or distinct sizes) to determine a fit."""


class SizeCapExceeded(TracefitError):
    """A corpus algorithm was asked for a size beyond its runtime cap."""


class ParseError(TracefitError):
    """A trace or assignment file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None,
                 content: str | None = None, path: str | None = None):
        self.line_no = line_no
        self.content = content
        self.path = path
        where = []
        if line_no is not None:
            where.append(f"line {line_no}")
        if path is not None:
            where.append(f"at {path}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class EmptyTrace(ParseError):
    """A trace file contained no data rows."""

    def __init__(self, message: str = "trace contains no data rows"):
        super().__init__(message)


class SpawnFailure(TracefitError):
    """The program under test could not be started at all."""


class ConfigError(TracefitError):
    """An assignment spec is malformed or inconsistent."""
