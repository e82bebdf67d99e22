"""Grading pipeline: test suite first, then the complexity gate.

A submission is an executable that reads a test input on stdin and writes
its answer on stdout. The pipeline:

1. runs every test and compares output against the reference;
2. if no test passed, stops with ``Incorrect`` (no tracing at all);
3. traces the program over the assignment's trace inputs using the step
   report protocol; any crash makes complexity analysis impossible
   (``RuntimeErrorNoAnalysis``);
4. classifies the trace and compares the basket with the required one.
"""

from __future__ import annotations

import enum
import json
import os
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from tracefit.classify import ClassificationReport, Flag, candidate_set, classify
from tracefit.errors import ConfigError, InsufficientData, SpawnFailure
from tracefit.fitting import FitOptions
from tracefit.models import Basket, model_for
from tracefit.traces import RunProtocol, execute, run_external

SPEC_KEYS = ("required_basket", "candidates", "tests", "trace_inputs", "timeout_secs")


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    input: str
    expected: str


@dataclass(frozen=True)
class AssignmentSpec:
    required_basket: Basket
    candidates: tuple[Basket, ...]
    tests: tuple[TestCase, ...]
    trace_inputs: tuple[tuple[int, str], ...]
    timeout: float = 10.0

    def __post_init__(self):
        if not self.tests:
            raise ConfigError("an assignment needs at least one test")
        if self.required_basket not in self.candidates:
            raise ConfigError(f"required basket {self.required_basket.token!r} "
                              "is not among the candidates")
        need = max(model_for(b).arity for b in self.candidates) + 1
        sizes = {s for s, _ in self.trace_inputs}
        if len(sizes) < need:
            raise ConfigError(f"trace_inputs need at least {need} distinct sizes, "
                              f"got {len(sizes)}")
        if not self.timeout > 0:
            raise ConfigError("timeout_secs must be positive")

    @classmethod
    def from_json_obj(cls, doc) -> "AssignmentSpec":
        if not isinstance(doc, dict):
            raise ConfigError("assignment spec must be a JSON object")
        missing = [k for k in SPEC_KEYS if k not in doc]
        if missing:
            raise ConfigError(f"assignment spec is missing {', '.join(missing)}")
        extra = sorted(set(doc) - set(SPEC_KEYS))
        if extra:
            raise ConfigError(f"unknown assignment spec keys: {', '.join(extra)}")
        try:
            required = Basket.from_token(_expect(doc["required_basket"], str, "required_basket"))
            cands = doc["candidates"]
            if not isinstance(cands, list):
                raise ConfigError("candidates must be an array")
            candidates = candidate_set(_expect(c, str, "candidates[]") for c in cands)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

        tests = []
        for i, t in enumerate(_expect(doc["tests"], list, "tests")):
            if not isinstance(t, dict) or set(t) != {"input", "expected"}:
                raise ConfigError(f"tests[{i}] must have exactly 'input' and 'expected'")
            tests.append(TestCase(_expect(t["input"], str, f"tests[{i}].input"),
                                  _expect(t["expected"], str, f"tests[{i}].expected")))
        traces = []
        for i, t in enumerate(_expect(doc["trace_inputs"], list, "trace_inputs")):
            if not isinstance(t, dict) or set(t) != {"size", "input"}:
                raise ConfigError(f"trace_inputs[{i}] must have exactly 'size' and 'input'")
            size = t["size"]
            if isinstance(size, bool) or not isinstance(size, int) or size <= 0:
                raise ConfigError(f"trace_inputs[{i}].size must be a positive integer")
            traces.append((size, _expect(t["input"], str, f"trace_inputs[{i}].input")))
        timeout = doc["timeout_secs"]
        if isinstance(timeout, bool) or not isinstance(timeout, (int, float)):
            raise ConfigError("timeout_secs must be a number")
        return cls(required, candidates, tuple(tests), tuple(traces), float(timeout))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "AssignmentSpec":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read assignment spec: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"assignment spec is not valid JSON: {exc}") from None
        return cls.from_json_obj(doc)

    def to_json_obj(self) -> dict:
        return {
            "required_basket": self.required_basket.token,
            "candidates": [b.token for b in self.candidates],
            "tests": [{"input": t.input, "expected": t.expected} for t in self.tests],
            "trace_inputs": [{"size": s, "input": p} for s, p in self.trace_inputs],
            "timeout_secs": self.timeout,
        }


def _expect(value, typ, where):
    if not isinstance(value, typ):
        raise ConfigError(f"{where} must be of type {typ.__name__}")
    return value


# ---------------------------------------------------------------------------
# Correctness
# ---------------------------------------------------------------------------

class TestStatus(str, enum.Enum):
    __test__ = False
    PASS = "Pass"
    FAIL = "Fail"
    CRASH = "Crash"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    status: TestStatus
    detail: str = ""


@dataclass(frozen=True)
class CorrectnessReport:
    per_test: tuple[TestOutcome, ...]

    @property
    def total(self) -> int:
        return len(self.per_test)

    @property
    def pass_count(self) -> int:
        return sum(1 for t in self.per_test if t.status is TestStatus.PASS)

    @property
    def all_passed(self) -> bool:
        return self.pass_count == self.total


def normalize_output(data: bytes) -> list[bytes]:
    """Lines with trailing whitespace removed; trailing blank lines dropped."""
    lines = [ln.rstrip(b" \t\r\f\v") for ln in data.split(b"\n")]
    while lines and not lines[-1]:
        lines.pop()
    return lines


def _short(b: bytes, limit: int = 40) -> str:
    s = b.decode("utf-8", errors="replace")
    return s if len(s) <= limit else s[: limit - 3] + "..."


def diff_summary(expected: bytes, actual: bytes) -> str:
    exp, got = normalize_output(expected), normalize_output(actual)
    for i, (e, g) in enumerate(zip(exp, got), start=1):
        if e != g:
            return f"line {i}: expected {_short(e)!r}, got {_short(g)!r}"
    if len(got) < len(exp):
        return f"output ended after {len(got)} lines, expected {len(exp)}"
    return f"{len(got) - len(exp)} unexpected extra lines"


def _run_test(program, test: TestCase, timeout: float) -> TestOutcome:
    try:
        proc = execute(program, test.input, timeout)
    except subprocess.TimeoutExpired:
        return TestOutcome(TestStatus.TIMEOUT, f"exceeded {timeout:g}s")
    if proc.returncode != 0:
        return TestOutcome(TestStatus.CRASH, f"exit status {proc.returncode}")
    expected = test.expected.encode("utf-8")
    if normalize_output(proc.stdout) == normalize_output(expected):
        return TestOutcome(TestStatus.PASS)
    return TestOutcome(TestStatus.FAIL, diff_summary(expected, proc.stdout))


def run_tests(program, spec: AssignmentSpec, max_parallel: int | None = None) -> CorrectnessReport:
    """Run every test in isolation; results keep the assignment's test order."""
    workers = max_parallel or RunProtocol.from_env().max_parallel
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(lambda t: _run_test(program, t, spec.timeout), spec.tests))
    return CorrectnessReport(tuple(outcomes))


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

class Outcome(str, enum.Enum):
    ACCEPTED = "Accepted"
    WRONG_COMPLEXITY = "WrongComplexity"
    PARTIALLY_CORRECT = "PartiallyCorrect"
    INCORRECT = "Incorrect"
    RUNTIME_ERROR_NO_ANALYSIS = "RuntimeErrorNoAnalysis"
    UNCLASSIFIABLE = "Unclassifiable"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    correctness: CorrectnessReport
    classification: ClassificationReport | None
    hardcode_suspect: bool
    notes: tuple[str, ...] = ()
    required_basket: Basket | None = None
    trace_executions: int = 0
    trace_failures: tuple = field(default=())


def detect_hardcoding(correctness: CorrectnessReport, classification: ClassificationReport,
                      required: Basket) -> bool:
    """Suspect pre-baked answers: passing tests while growing slower than required."""
    if classification.chosen is None:
        return False
    if correctness.pass_count >= 1 and classification.chosen < required:
        return True
    return Flag.NEAR_CONSTANT in classification.flags and required > Basket.LINEAR


def grade(program, spec: AssignmentSpec, options: FitOptions | None = None,
          max_parallel: int | None = None) -> Verdict:
    protocol = RunProtocol(timeout=spec.timeout,
                           max_parallel=max_parallel or RunProtocol.from_env().max_parallel)
    correctness = run_tests(program, spec, protocol.max_parallel)
    required = spec.required_basket

    if correctness.pass_count == 0:
        return Verdict(Outcome.INCORRECT, correctness, None, False,
                       ("no test passed; complexity analysis skipped",), required, 0)

    run = run_external(program, spec.trace_inputs, protocol)
    failures = tuple(run.failures)
    notes = [f"trace at size {f.size}: {f.kind.value} ({f.detail})" for f in failures]
    if not run.complexity_available:
        notes.insert(0, "program crashed while tracing; complexity cannot be analyzed")
        return Verdict(Outcome.RUNTIME_ERROR_NO_ANALYSIS, correctness, None, False,
                       tuple(notes), required, run.executions, failures)

    try:
        if run.series is None:
            raise InsufficientData("no trace execution succeeded")
        report = classify(run.series, spec.candidates, options)
    except InsufficientData as exc:
        notes.append(f"not enough trace data to classify: {exc}; manual review needed")
        return Verdict(Outcome.UNCLASSIFIABLE, correctness, None, False, tuple(notes),
                       required, run.executions, failures)

    if report.chosen is None:
        notes.append("every curve fit failed; manual review needed")
        return Verdict(Outcome.UNCLASSIFIABLE, correctness, report, False, tuple(notes),
                       required, run.executions, failures)

    suspect = detect_hardcoding(correctness, report, required)
    if report.chosen != required:
        direction = "faster" if report.chosen < required else "slower"
        notes.append(f"classified {report.chosen.token}, {direction} than the required "
                     f"{required.token}")
        if suspect:
            notes.append("trace grows slower than any correct solution could; "
                         "possible hard-coded answers")
        outcome = Outcome.WRONG_COMPLEXITY
    elif correctness.all_passed:
        outcome = Outcome.ACCEPTED
    else:
        notes.append(f"{correctness.pass_count}/{correctness.total} tests passed with the "
                     "required complexity; partial credit is left to the grader")
        outcome = Outcome.PARTIALLY_CORRECT
    if suspect and outcome is not Outcome.WRONG_COMPLEXITY:
        notes.append("trace is flat; possible hard-coded answers")
    if Flag.AMBIGUOUS in report.flags:
        notes.append("two or more baskets fit almost equally well")
    return Verdict(outcome, correctness, report, suspect, tuple(notes), required,
                   run.executions, failures)
