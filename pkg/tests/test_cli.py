import json

import pytest

from conftest import CLI_SUITE, run_cli_suite
from tracefit.cli import main, parse_sizes
from tracefit.serialize import (dumps, fit_from_json, fit_to_json, report_from_json,
                                report_to_json, verdict_from_json, verdict_to_json)

EXPECTED_CODES = {
    "corpus-bubble": 0, "corpus-merge": 0, "corpus-fib-stdout": 0, "corpus-fib": 0,
    "corpus-cap": 2, "fit-line": 0, "fit-line-json": 0, "fit-merge": 0, "fit-fib-json": 0,
    "fit-na": 1, "fit-missing": 2, "classify-bubble": 0, "classify-fib-json": 0,
    "classify-single": 0, "classify-expect": 1, "classify-empty-candidates": 2,
    "plot-merge": 0, "plot-huge": 0, "plot-empty": 2, "grade-merge": 0, "grade-merge-json": 0,
    "grade-bubble-json": 1, "grade-hardcoded-json": 1, "grade-wrong-json": 1,
    "grade-crash-json": 1, "grade-no-tests": 2,
}


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    return run_cli_suite(tmp_path_factory.mktemp("cli"))


def test_suite_covers_every_invocation():
    assert set(EXPECTED_CODES) == {name for name, _ in CLI_SUITE}


@pytest.mark.parametrize("name", sorted(EXPECTED_CODES))
def test_exit_codes(suite, name):
    code, _, stderr = suite[name]
    assert code == EXPECTED_CODES[name], stderr


def test_fit_text(suite):
    _, out, _ = suite["fit-line"]
    assert "a=2.00e0" in out and "b=8.00e0" in out and "mse=0.00e0" in out
    assert out.startswith("model: linear (a*x + b)\n")


def test_fit_failure_text(suite):
    _, out, _ = suite["fit-na"]
    assert "NA (InsufficientData" in out


def test_usage_errors_print_usage(suite):
    for name in ("fit-missing", "classify-empty-candidates", "corpus-cap", "plot-empty",
                 "grade-no-tests"):
        _, out, err = suite[name]
        assert err.startswith("usage: tracefit") and out == ""
    assert "capped at size 30" in suite["corpus-cap"][2]


def test_corpus_csv(suite):
    text = suite["file:bubble.csv"].decode()
    lines = text.splitlines()
    assert lines[0] == "input_size,cost" and len(lines) == 13
    assert lines[1] == "5,30" and lines[-1] == "60,5310"
    assert suite["corpus-fib-stdout"][1].encode() == suite["file:fib.csv"]


def test_classify_outputs(suite):
    assert suite["classify-bubble"][1].startswith("chosen: quadratic\n")
    assert suite["classify-single"][1].startswith("chosen: exponential\n")
    doc = json.loads(suite["classify-fib-json"][1])
    assert doc["chosen"] == "exponential"
    assert [f["basket"] for f in doc["fits"]] == ["log", "linear", "nlogn", "quadratic",
                                                  "exponential"]


def test_plot_data(suite):
    lines = suite["file:plot.csv"].decode().splitlines()
    assert lines[0] == "x,observed,linear,nlogn,quadratic"
    rows = [ln.split(",") for ln in lines[1:]]
    assert all(len(r) == 5 for r in rows)
    xs = [float(r[0]) for r in rows]
    assert xs == sorted(xs) and xs[0] == 5.0 and xs[-1] == 100.0
    assert 200 <= len(rows) <= 220
    assert sum(1 for r in rows if r[1]) == 20


def test_plot_data_failed_models(suite):
    lines = suite["plot-huge"][1].splitlines()
    assert lines[:2] == ["# log: NA", "# exponential: NA"]
    assert lines[2] == "x,observed,linear,nlogn,quadratic"


def test_grade_text(suite):
    out = suite["grade-merge"][1]
    assert out.startswith("outcome: Accepted\ntests: 5/5 passed\nhardcode_suspect: no\n")


def test_grade_json(suite):
    outcomes = {n: json.loads(suite[n][1])["outcome"] for n in suite
                if n.startswith("grade-") and n.endswith("-json")}
    assert outcomes == {"grade-merge-json": "Accepted", "grade-bubble-json": "WrongComplexity",
                        "grade-hardcoded-json": "WrongComplexity",
                        "grade-wrong-json": "Incorrect",
                        "grade-crash-json": "RuntimeErrorNoAnalysis"}
    assert json.loads(suite["grade-hardcoded-json"][1])["hardcode_suspect"] is True
    assert json.loads(suite["grade-wrong-json"][1])["trace_executions"] == 0


def test_json_round_trips(suite):
    fit_doc = suite["fit-fib-json"][1]
    assert dumps(fit_to_json(fit_from_json(json.loads(fit_doc)))) == fit_doc
    rep_doc = suite["classify-fib-json"][1]
    assert dumps(report_to_json(report_from_json(json.loads(rep_doc)))) == rep_doc
    for name in ("grade-merge-json", "grade-hardcoded-json", "grade-crash-json"):
        doc = suite[name][1]
        assert dumps(verdict_to_json(verdict_from_json(json.loads(doc)))) == doc


def test_in_process_main(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    trace.write_text("1,4\n2,7\n3,10\n4,13\n5,16\n")
    assert main(["classify", str(trace), "--candidates", "linear,quadratic",
                 "--expect", "linear"]) == 0
    out = capsys.readouterr().out
    assert "flags: Ambiguous" in out


def test_spawn_failure_is_runtime_error(tmp_path, capsys):
    prog = tmp_path / "not_exec.py"
    prog.write_text("print(1)\n")
    from conftest import SORT_SPEC
    assert main(["grade", "--program", str(prog), "--spec", str(SORT_SPEC)]) == 3


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["fit"])
    assert info.value.code == 2


@pytest.mark.parametrize("text,sizes", [("5:20:5", [5, 10, 15, 20]), ("5:22:5", [5, 10, 15, 20]),
                                        ("3:3", [3]), ("1:4", [1, 2, 3, 4])])
def test_parse_sizes(text, sizes):
    assert parse_sizes(text) == sizes


@pytest.mark.parametrize("text", ["5", "0:5", "5:1", "1:5:0", "a:b", "1:2:3:4"])
def test_parse_sizes_rejects(text):
    from tracefit.cli import UsageError
    with pytest.raises(UsageError):
        parse_sizes(text)
