"""Trace series and the ways of obtaining them from outside the process.

A trace series is a list of ``(input_size, cost)`` observations for one
program. Costs are abstract step counts. Series come from the built-in
corpus (:mod:`tracefit.corpus`), from CSV/JSON files, or from running an
external program that reports its own step count on stderr::

    CASET_STEPS=<decimal u64>

as the final non-empty line, with exit status 0.
"""

from __future__ import annotations

import enum
import json
import math
import os
import re
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from tracefit.errors import EmptyTrace, ParseError, SpawnFailure

CSV_HEADER = "input_size,cost"
STEP_TOKEN = "CASET_STEPS="
_STEP_LINE = re.compile(r"CASET_STEPS=([0-9]+)")
_U64_MAX = 2**64 - 1
_INT_RE = re.compile(r"[+-]?[0-9]+")


class Source(str, enum.Enum):
    CORPUS = "corpus"
    FILE = "file"
    EXTERNAL = "external"


@dataclass(frozen=True)
class TraceSeries:
    """Observations sorted ascending by size; equal sizes keep arrival order."""

    points: tuple[tuple[int, float], ...]
    source: Source = Source.FILE
    label: str | None = None

    def __post_init__(self):
        pts = []
        for size, cost in self.points:
            if isinstance(size, bool) or not isinstance(size, (int, np.integer)):
                raise ValueError(f"input size must be an integer, got {size!r}")
            if size <= 0:
                raise ValueError(f"input size must be positive, got {size}")
            if isinstance(cost, bool) or not isinstance(cost, (int, float, np.integer, np.floating)):
                raise ValueError(f"cost must be a number, got {cost!r}")
            if not math.isfinite(cost) or cost < 0:
                raise ValueError(f"cost must be finite and non-negative, got {cost}")
            pts.append((int(size), cost.item() if isinstance(cost, np.generic) else cost))
        if not pts:
            raise ValueError("a trace series needs at least one point")
        pts.sort(key=lambda p: p[0])
        object.__setattr__(self, "points", tuple(pts))

    @classmethod
    def from_arrays(cls, sizes: Iterable[int], costs: Iterable[float], **kw) -> "TraceSeries":
        return cls(tuple(zip(sizes, costs)), **kw)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def y(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=float)

    @property
    def distinct_sizes(self) -> int:
        return len({p[0] for p in self.points})

    def scaled(self, k: float) -> "TraceSeries":
        """Same sizes with every cost multiplied by ``k``."""
        return TraceSeries(tuple((s, c * k) for s, c in self.points), self.source, self.label)

    def to_csv(self, header: bool = True) -> str:
        lines = [CSV_HEADER] if header else []
        lines += [f"{s},{_format_cost(c)}" for s, c in self.points]
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | os.PathLike, header: bool = True) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv(header))

    def to_json_obj(self) -> dict:
        obj = {"trace": [{"input_size": s, "cost": c} for s, c in self.points]}
        if self.label is not None:
            obj["label"] = self.label
        return obj


def _format_cost(c: float) -> str:
    if isinstance(c, int):
        return str(c)
    if float(c).is_integer() and abs(c) < 2**53:
        return str(int(c))
    return repr(float(c))


def _parse_number(text: str) -> int | float:
    if _INT_RE.fullmatch(text):
        return int(text)
    return float(text)


# ---------------------------------------------------------------------------
# File ingestion
# ---------------------------------------------------------------------------

def parse_csv(text: str, label: str | None = None) -> TraceSeries:
    points = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line_no == 1 and line == CSV_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError("expected 'input_size,cost'", line_no, raw)
        size_txt, cost_txt = (p.strip() for p in parts)
        if not _INT_RE.fullmatch(size_txt):
            raise ParseError("input_size must be an integer", line_no, raw)
        try:
            cost = _parse_number(cost_txt)
        except ValueError:
            raise ParseError("cost is not a number", line_no, raw) from None
        size = int(size_txt)
        if size <= 0:
            raise ParseError("input_size must be positive", line_no, raw)
        if not math.isfinite(cost) or cost < 0:
            raise ParseError("cost must be finite and non-negative", line_no, raw)
        points.append((size, cost))
    if not points:
        raise EmptyTrace()
    return TraceSeries(tuple(points), Source.FILE, label)


def ingest_csv(path: str | os.PathLike) -> TraceSeries:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read())


def parse_json(doc) -> TraceSeries:
    """Build a series from a decoded JSON document (bare array or wrapped)."""
    label = None
    base = "$"
    if isinstance(doc, dict):
        if "trace" not in doc:
            raise ParseError("object form needs a 'trace' array", path="$")
        label = doc.get("label")
        if label is not None and not isinstance(label, str):
            raise ParseError("label must be a string", path="$.label")
        doc = doc["trace"]
        base = "$.trace"
    if not isinstance(doc, list):
        raise ParseError("expected an array of observations", path=base)
    points = []
    for i, item in enumerate(doc):
        where = f"{base}[{i}]"
        if not isinstance(item, dict):
            raise ParseError("expected an object", path=where)
        size, cost = item.get("input_size"), item.get("cost")
        if isinstance(size, bool) or not isinstance(size, (int, float)):
            raise ParseError("input_size must be a number", path=f"{where}.input_size")
        if isinstance(size, float):
            if not size.is_integer():
                raise ParseError("input_size must be an integer", path=f"{where}.input_size")
            size = int(size)
        if size <= 0:
            raise ParseError("input_size must be positive", path=f"{where}.input_size")
        if isinstance(cost, bool) or not isinstance(cost, (int, float)):
            raise ParseError("cost must be a number", path=f"{where}.cost")
        if not math.isfinite(cost) or cost < 0:
            raise ParseError("cost must be finite and non-negative", path=f"{where}.cost")
        points.append((size, cost))
    if not points:
        raise EmptyTrace()
    return TraceSeries(tuple(points), Source.FILE, label)


def ingest_json(path: str | os.PathLike) -> TraceSeries:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, path="$") from None
    return parse_json(doc)


def ingest(path: str | os.PathLike) -> TraceSeries:
    """Dispatch on extension: ``.json`` is JSON, anything else is CSV."""
    if Path(path).suffix.lower() == ".json":
        return ingest_json(path)
    return ingest_csv(path)


# ---------------------------------------------------------------------------
# External programs
# ---------------------------------------------------------------------------

class ExecFailureKind(str, enum.Enum):
    TIMEOUT = "Timeout"
    CRASHED_OR_NONZERO_EXIT = "CrashedOrNonzeroExit"
    PROTOCOL_VIOLATION = "ProtocolViolation"


@dataclass(frozen=True)
class ExecFailure:
    size: int
    kind: ExecFailureKind
    detail: str = ""


@dataclass(frozen=True)
class RunProtocol:
    timeout: float = 10.0
    max_parallel: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be at least 1")

    @classmethod
    def from_env(cls, timeout: float = 10.0) -> "RunProtocol":
        env = os.environ.get("CASET_MAX_PARALLEL")
        return cls(timeout=timeout, max_parallel=int(env) if env else 4)


@dataclass
class ExternalRun:
    """Outcome of tracing an external program over a set of inputs."""

    series: TraceSeries | None
    failures: list[ExecFailure] = field(default_factory=list)
    executions: int = 0

    @property
    def complexity_available(self) -> bool:
        # A crashing program cannot be complexity-analyzed at all.
        return not any(f.kind is ExecFailureKind.CRASHED_OR_NONZERO_EXIT for f in self.failures)


def parse_step_report(stderr: str) -> int:
    """Extract the step count from a diagnostic stream.

    Raises ValueError describing the protocol violation when the final
    non-empty line is not exactly ``CASET_STEPS=<u64>`` or the token occurs
    more than once.
    """
    lines = [ln.rstrip("\r") for ln in stderr.split("\n")]
    nonempty = [ln for ln in lines if ln.strip()]
    if not nonempty:
        raise ValueError("no step report on stderr")
    hits = sum(ln.count(STEP_TOKEN) for ln in nonempty)
    if hits != 1:
        raise ValueError(f"expected exactly one {STEP_TOKEN} line, found {hits}")
    m = _STEP_LINE.fullmatch(nonempty[-1])
    if m is None:
        raise ValueError(f"final diagnostic line is not a step report: {nonempty[-1]!r}")
    steps = int(m.group(1))
    if steps > _U64_MAX:
        raise ValueError("step count exceeds 64 bits")
    return steps


def _argv(program) -> list[str]:
    if isinstance(program, (list, tuple)):
        return [str(p) for p in program]
    return [str(program)]


def execute(program, payload: str | bytes, timeout: float) -> subprocess.CompletedProcess:
    """Run ``program`` once with ``payload`` on stdin.

    Raises SpawnFailure if the program cannot be started and
    subprocess.TimeoutExpired on timeout.
    """
    data = payload.encode("utf-8") if isinstance(payload, str) else payload
    try:
        return subprocess.run(_argv(program), input=data, capture_output=True,
                              timeout=timeout, check=False)
    except OSError as exc:
        raise SpawnFailure(f"cannot execute {program!r}: {exc}") from exc


def _trace_one(program, size: int, payload, timeout: float) -> tuple[int, ExecFailure | None]:
    try:
        proc = execute(program, payload, timeout)
    except subprocess.TimeoutExpired:
        return 0, ExecFailure(size, ExecFailureKind.TIMEOUT, f"exceeded {timeout:g}s")
    if proc.returncode != 0:
        return 0, ExecFailure(size, ExecFailureKind.CRASHED_OR_NONZERO_EXIT,
                              f"exit status {proc.returncode}")
    try:
        steps = parse_step_report(proc.stderr.decode("utf-8", errors="replace"))
    except ValueError as exc:
        return 0, ExecFailure(size, ExecFailureKind.PROTOCOL_VIOLATION, str(exc))
    return steps, None


def run_external(program, trace_inputs: Sequence[tuple[int, str | bytes]],
                 protocol: RunProtocol | None = None, label: str | None = None) -> ExternalRun:
    """Trace ``program`` once per ``(size, payload)``; failures are per case.

    Executions run concurrently up to ``protocol.max_parallel``. Results are
    assembled in input order, so the outcome does not depend on scheduling.
    """
    protocol = protocol or RunProtocol.from_env()
    if not trace_inputs:
        return ExternalRun(None, [], 0)
    # Fail fast (whole-call error) when the program cannot be spawned at all.
    argv = _argv(program)
    if not os.access(argv[0], os.X_OK) and os.sep in argv[0]:
        raise SpawnFailure(f"{argv[0]} is not executable")

    with ThreadPoolExecutor(max_workers=protocol.max_parallel) as pool:
        futures = [pool.submit(_trace_one, program, size, payload, protocol.timeout)
                   for size, payload in trace_inputs]
        outcomes = [f.result() for f in futures]

    points, failures = [], []
    for (size, _), (steps, failure) in zip(trace_inputs, outcomes):
        if failure is None:
            points.append((size, steps))
        else:
            failures.append(failure)
    series = TraceSeries(tuple(points), Source.EXTERNAL, label) if points else None
    return ExternalRun(series, failures, len(trace_inputs))
