"""Command-line front end.

Exit codes: 0 success (and, for ``grade``, an Accepted verdict); 1 the
command ran but the answer is negative (fit failed, non-Accepted verdict,
classification differs from ``--expect``); 2 usage or input error;
3 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from tracefit import serialize
from tracefit.classify import ALL_BASKETS, classify, format_sci, margin_report, parse_candidates
from tracefit.corpus import Algorithm, run_corpus
from tracefit.errors import (ConfigError, InsufficientData, ParseError, SizeCapExceeded,
                             SpawnFailure)
from tracefit.fitting import fit
from tracefit.grading import AssignmentSpec, Outcome, grade
from tracefit.models import Basket, get_model
from tracefit.traces import RunProtocol, ingest

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
PLOT_POINTS = 200


class UsageError(Exception):
    pass


def parse_sizes(text: str) -> list[int]:
    """``start:stop:step`` with inclusive start and stop (if on the grid)."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"size spec must be start:stop[:step], got {text!r}")
    try:
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise UsageError(f"size spec must contain integers, got {text!r}") from None
    if start < 1 or step < 1 or stop < start:
        raise UsageError(f"size spec needs 1 <= start <= stop and step >= 1, got {text!r}")
    return list(range(start, stop + 1, step))


def _load_trace(path: str):
    if not os.path.exists(path):
        raise UsageError(f"trace file not found: {path}")
    return ingest(path)


def _candidates(text: str | None):
    if text is None:
        return ALL_BASKETS
    try:
        return parse_candidates(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out=None) -> None:
    (out or sys.stdout).write(text)


def cmd_fit(args) -> int:
    try:
        model = get_model(args.model)
    except (KeyError, ValueError):
        raise UsageError(f"unknown model {args.model!r}") from None
    res = fit(model, _load_trace(args.trace))
    if args.format == "json":
        _emit(serialize.dumps(serialize.fit_to_json(res)))
    else:
        lines = [f"model: {model.token} ({model.equation})"]
        if res.ok:
            lines += [f"{n}={format_sci(p)}" for n, p in zip(model.param_names, res.params)]
            lines.append(f"mse={format_sci(res.mse)}")
            lines.append(f"iterations={res.iterations} start={res.start_index} "
                         f"converged={'yes' if res.converged else 'no'}")
        else:
            reason = res.reason.value + (f": {res.detail}" if res.detail else "")
            lines.append(f"NA ({reason})")
        _emit("\n".join(lines) + "\n")
    return EXIT_OK if res.ok else EXIT_NEGATIVE


def cmd_classify(args) -> int:
    candidates = _candidates(args.candidates)
    expect = None
    if args.expect is not None:
        try:
            expect = Basket.from_token(args.expect)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    report = classify(_load_trace(args.trace), candidates)
    if args.format == "json":
        _emit(serialize.dumps(serialize.report_to_json(report)))
    else:
        _emit(margin_report(report) + "\n")
    if report.chosen is None or (expect is not None and report.chosen != expect):
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_grade(args) -> int:
    if not os.path.exists(args.program):
        raise UsageError(f"program not found: {args.program}")
    spec = AssignmentSpec.load(args.spec)
    verdict = grade(args.program, spec, max_parallel=RunProtocol.from_env().max_parallel)
    if args.format == "json":
        _emit(serialize.dumps(serialize.verdict_to_json(verdict)))
    else:
        c = verdict.correctness
        lines = [f"outcome: {verdict.outcome.value}",
                 f"tests: {c.pass_count}/{c.total} passed",
                 f"hardcode_suspect: {'yes' if verdict.hardcode_suspect else 'no'}"]
        for i, t in enumerate(c.per_test):
            lines.append(f"  test {i}: {t.status.value}" + (f" ({t.detail})" if t.detail else ""))
        if verdict.classification is not None:
            lines.append(margin_report(verdict.classification))
        lines += [f"note: {n}" for n in verdict.notes]
        _emit("\n".join(lines) + "\n")
    return EXIT_OK if verdict.outcome is Outcome.ACCEPTED else EXIT_NEGATIVE


def cmd_corpus(args) -> int:
    try:
        algorithm = Algorithm(args.algorithm)
    except ValueError:
        raise UsageError(f"unknown algorithm {args.algorithm!r}") from None
    sizes = parse_sizes(args.sizes) if args.sizes else None
    series = run_corpus(algorithm, sizes, args.seed)
    if args.out:
        series.write_csv(args.out)
    else:
        _emit(series.to_csv())
    return EXIT_OK


def _plot_rows(series, fits):
    x_obs = series.x
    grid = np.linspace(x_obs.min(), x_obs.max(), PLOT_POINTS)
    rows = [[float(g), None] for g in grid]
    index = {float(g): i for i, g in enumerate(grid)}
    for size, cost in series.points:
        i = index.get(float(size))
        if i is not None and rows[i][1] is None:
            rows[i][1] = cost
        else:
            rows.append([float(size), cost])
    rows.sort(key=lambda r: r[0])
    xs = np.array([r[0] for r in rows])
    cols = [res.model.values(res.params, xs) for res in fits]
    for j, r in enumerate(rows):
        r.extend(float(c[j]) for c in cols)
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def cmd_plot_data(args) -> int:
    candidates = _candidates(args.candidates)
    series = _load_trace(args.trace)
    report = classify(series, candidates)
    fits, lines = [], []
    for res in report.per_model.values():
        if res.ok:
            fits.append(res)
        else:
            lines.append(f"# {res.model.token}: NA")
    lines.append(",".join(["x", "observed"] + [r.model.token for r in fits]))
    for row in _plot_rows(series, fits):
        lines.append(",".join(_cell(v) for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        _emit(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tracefit",
                                description="Classify programs into complexity baskets "
                                            "from step-count traces.")
    sub = p.add_subparsers(dest="command", required=True)
    tokens = ", ".join(b.token for b in Basket)

    f = sub.add_parser("fit", help="fit one curve family to a trace")
    f.add_argument("trace")
    f.add_argument("--model", required=True, help=tokens)
    f.add_argument("--format", choices=("text", "json"), default="text")
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("classify", help="choose the best-fitting complexity basket")
    c.add_argument("trace")
    c.add_argument("--candidates", help=f"comma-separated subset of: {tokens}")
    c.add_argument("--expect", help="exit 1 unless this basket is chosen")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_classify)

    g = sub.add_parser("grade", help="grade a submission against an assignment spec")
    g.add_argument("--program", required=True)
    g.add_argument("--spec", required=True)
    g.add_argument("--format", choices=("text", "json"), default="text")
    g.set_defaults(func=cmd_grade)

    k = sub.add_parser("corpus", help="write the step-count trace of a reference algorithm")
    k.add_argument("--algorithm", required=True, help=", ".join(a.value for a in Algorithm))
    k.add_argument("--sizes", help="start:stop:step (default: the algorithm's schedule)")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out")
    k.set_defaults(func=cmd_corpus)

    d = sub.add_parser("plot-data", help="write observed and fitted curves as CSV")
    d.add_argument("trace")
    d.add_argument("--candidates", help=f"comma-separated subset of: {tokens}")
    d.add_argument("--out")
    d.set_defaults(func=cmd_plot_data)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, ConfigError, SizeCapExceeded, InsufficientData) as exc:
        parser.print_usage(sys.stderr)
        print(f"tracefit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpawnFailure as exc:
        print(f"tracefit {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"tracefit {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
