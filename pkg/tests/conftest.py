import functools
import os
import sys
from pathlib import Path

import numpy as np
import pytest

from tracefit.models import EXP, LIN, LOG, NLOGN, QUAD

HERE = Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"
PROGRAMS = FIXTURES / "programs"
SORT_SPEC = FIXTURES / "sort_nlogn.json"


def program(name: str) -> str:
    return str(PROGRAMS / f"{name}.py")


def random_params(model, rng: np.random.Generator) -> np.ndarray:
    """A parameter draw that keeps every family in-domain and well scaled on x in [1, 100]."""
    if model is LIN:
        return np.array([rng.uniform(0.5, 50), rng.uniform(-100, 100)])
    if model is QUAD:
        return np.array([rng.uniform(0.1, 10), rng.uniform(-5, 50), rng.uniform(-100, 100)])
    if model is LOG:
        return np.array([rng.uniform(1, 100), rng.uniform(0.5, 20), rng.uniform(-50, 50)])
    if model is NLOGN:
        return np.array([rng.uniform(1, 20), rng.uniform(-5, 20), rng.uniform(0.5, 3),
                         rng.uniform(0.5, 5)])
    if model is EXP:
        return np.array([rng.uniform(0.05, 0.3), rng.uniform(0, 5), rng.uniform(-50, 50)])
    raise AssertionError(model)


def costs_params(model, rng: np.random.Generator, x) -> np.ndarray:
    """Redraw until the curve is a valid cost series (non-negative) over ``x``."""
    while True:
        p = random_params(model, rng)
        if np.min(model.values(p, np.asarray(x))) >= 0:
            return p


@pytest.fixture
def cli_env(monkeypatch):
    monkeypatch.setenv("CASET_MAX_PARALLEL", "4")
    return os.environ


def run_cli(*args: str, cwd=None):
    import subprocess
    return subprocess.run([sys.executable, "-m", "tracefit", *args], capture_output=True,
                          text=True, cwd=cwd, timeout=300)


# Independent high-precision formulas, written separately from the package kernels.
def _mp_formulas():
    import mpmath as mp
    return {
        "LIN": lambda p, x: p[0] * x + p[1],
        "LOG": lambda p, x: p[0] * mp.log(x + p[1]) + p[2],
        "NLOGN": lambda p, x: (p[0] * x + p[1]) * mp.log(p[2] * x + p[3]),
        "QUAD": lambda p, x: p[0] * x ** 2 + p[1] * x + p[2],
        "EXP": lambda p, x: mp.exp(p[0] * x + p[1]) + p[2],
    }


def mp_gradient(model, params, x) -> np.ndarray:
    """Partial derivatives by 50-digit numerical differentiation."""
    import mpmath as mp
    f = _mp_formulas()[model.id.value]
    with mp.workdps(50):
        p0 = [mp.mpf(float(v)) for v in params]
        xm = mp.mpf(float(x))
        out = []
        for i in range(len(p0)):
            def g(t, i=i):
                q = list(p0)
                q[i] = t
                return f(q, xm)
            out.append(float(mp.diff(g, p0[i])))
    return np.array(out)


@functools.lru_cache(maxsize=None)
def fixture_series(count: int = 20) -> tuple:
    """Deterministic mix of corpus traces and noisy synthetic series."""
    from tracefit.corpus import CORPUS, run_corpus
    from tracefit.models import MODELS
    from tracefit.traces import TraceSeries

    out = [run_corpus(alg) for alg in CORPUS]
    rng = np.random.default_rng(99)
    families = list(MODELS.values())
    x = np.arange(5, 101, 5)
    i = 0
    while len(out) < count:
        model = families[i % len(families)]
        i += 1
        p = costs_params(model, rng, x)
        y = model.values(p, x)
        noisy = y * (1 + rng.normal(0, 0.01, y.size))
        out.append(TraceSeries.from_arrays(x, np.abs(noisy), label=f"synthetic-{model.token}"))
    return tuple(out[:count])


# -- CLI fixture suite ----------------------------------------------------------

CLI_TRACES = {
    "lin.csv": "input_size,cost\n1,10\n2,12\n3,14\n4,16\n",
    "tiny.csv": "1,2.718281828459045\n2,7.38905609893065\n3,20.085536923187668\n",
    "empty.csv": "input_size,cost\n",
    "huge.csv": "".join(f"{x},{1e160 * x!r}\n" for x in range(1, 21)),
}

CLI_SUITE = [
    ("corpus-bubble", ["corpus", "--algorithm", "bubble_sort", "--sizes", "5:60:5", "--seed", "0",
                       "--out", "bubble.csv"]),
    ("corpus-merge", ["corpus", "--algorithm", "merge_sort_recursive", "--out", "merge.csv"]),
    ("corpus-fib-stdout", ["corpus", "--algorithm", "fib_recursive"]),
    ("corpus-fib", ["corpus", "--algorithm", "fib_recursive", "--out", "fib.csv"]),
    ("corpus-cap", ["corpus", "--algorithm", "fib_recursive", "--sizes", "5:50:1"]),
    ("fit-line", ["fit", "lin.csv", "--model", "linear"]),
    ("fit-line-json", ["fit", "lin.csv", "--model", "linear", "--format", "json"]),
    ("fit-merge", ["fit", "merge.csv", "--model", "nlogn"]),
    ("fit-fib-json", ["fit", "fib.csv", "--model", "exponential", "--format", "json"]),
    ("fit-na", ["fit", "tiny.csv", "--model", "log"]),
    ("fit-missing", ["fit", "nope.csv", "--model", "linear"]),
    ("classify-bubble", ["classify", "bubble.csv", "--candidates", "linear,nlogn,quadratic"]),
    ("classify-fib-json", ["classify", "fib.csv", "--format", "json"]),
    ("classify-single", ["classify", "bubble.csv", "--candidates", "exponential"]),
    ("classify-expect", ["classify", "bubble.csv", "--expect", "linear"]),
    ("classify-empty-candidates", ["classify", "bubble.csv", "--candidates", ""]),
    ("plot-merge", ["plot-data", "merge.csv", "--candidates", "linear,nlogn,quadratic",
                    "--out", "plot.csv"]),
    ("plot-huge", ["plot-data", "huge.csv"]),
    ("plot-empty", ["plot-data", "empty.csv"]),
    ("grade-merge", ["grade", "--program", "@merge_sort", "--spec", "spec.json"]),
    ("grade-merge-json", ["grade", "--program", "@merge_sort", "--spec", "spec.json",
                          "--format", "json"]),
    ("grade-bubble-json", ["grade", "--program", "@bubble_sort", "--spec", "spec.json",
                           "--format", "json"]),
    ("grade-hardcoded-json", ["grade", "--program", "@hardcoded", "--spec", "spec.json",
                              "--format", "json"]),
    ("grade-wrong-json", ["grade", "--program", "@wrong_output", "--spec", "spec.json",
                          "--format", "json"]),
    ("grade-crash-json", ["grade", "--program", "@crashes_on_large", "--spec", "spec.json",
                          "--format", "json"]),
    ("grade-no-tests", ["grade", "--program", "@merge_sort", "--spec", "no_tests.json"]),
]


def prepare_cli_workdir(workdir: Path) -> None:
    import json
    for name, text in CLI_TRACES.items():
        (workdir / name).write_text(text)
    doc = json.loads(SORT_SPEC.read_text())
    (workdir / "spec.json").write_text(json.dumps(doc))
    doc.pop("tests")
    (workdir / "no_tests.json").write_text(json.dumps(doc))


def run_cli_suite(workdir: Path) -> dict:
    """Run every suite invocation in ``workdir``; returns name -> (code, stdout, stderr)."""
    prepare_cli_workdir(workdir)
    out = {}
    for name, args in CLI_SUITE:
        argv = [program(a[1:]) if a.startswith("@") else a for a in args]
        proc = run_cli(*argv, cwd=workdir)
        out[name] = (proc.returncode, proc.stdout, proc.stderr)
    for f in sorted(workdir.iterdir()):
        out[f"file:{f.name}"] = f.read_bytes()
    return out


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
