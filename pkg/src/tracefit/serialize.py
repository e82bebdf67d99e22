"""JSON documents for fits, classification reports and verdicts.

Key order is fixed and floats use Python's shortest round-trip repr, so a
given result always serializes to the same bytes. Every writer has a
matching reader.
"""

from __future__ import annotations

import json
import math

from tracefit.classify import ClassificationReport, Flag
from tracefit.fitting import FailureReason, FitFailure, FitResult
from tracefit.grading import (CorrectnessReport, Outcome, TestOutcome, TestStatus, Verdict)
from tracefit.models import Basket, ModelId, get_model
from tracefit.traces import ExecFailure, ExecFailureKind


def _num(v: float | None):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def _unnum(v):
    # float() also accepts the "inf" / "-inf" markers written by _num.
    return None if v is None else float(v)


def fit_to_json(res: FitResult | FitFailure) -> dict:
    model = get_model(res.model_id)
    obj = {"model": res.model_id.value, "basket": model.basket.token,
           "equation": model.equation}
    if res.ok:
        obj.update({
            "status": "ok",
            "params": dict(zip(model.param_names, (float(p) for p in res.params))),
            "mse": float(res.mse),
            "iterations": res.iterations,
            "start_index": res.start_index,
            "converged": res.converged,
        })
    else:
        obj.update({"status": "failed", "reason": res.reason.value, "detail": res.detail})
    return obj


def fit_from_json(obj: dict) -> FitResult | FitFailure:
    mid = ModelId(obj["model"])
    if obj["status"] == "ok":
        model = get_model(mid)
        params = tuple(float(obj["params"][n]) for n in model.param_names)
        return FitResult(mid, params, float(obj["mse"]), int(obj["iterations"]),
                         int(obj["start_index"]), bool(obj["converged"]))
    return FitFailure(mid, FailureReason(obj["reason"]), obj.get("detail", ""))


def report_to_json(report: ClassificationReport) -> dict:
    return {
        "chosen": report.chosen_token,
        "margin": _num(report.margin),
        "flags": sorted(f.value for f in report.flags),
        "non_growing": [m.value for m in report.non_growing],
        "fits": [fit_to_json(r) for r in report.per_model.values()],
    }


def report_from_json(obj: dict) -> ClassificationReport:
    per_model = {}
    for f in obj["fits"]:
        res = fit_from_json(f)
        per_model[res.model_id] = res
    chosen = None if obj["chosen"] == "Unclassifiable" else Basket.from_token(obj["chosen"])
    return ClassificationReport(per_model, chosen, _unnum(obj["margin"]),
                                frozenset(Flag(f) for f in obj["flags"]),
                                tuple(ModelId(m) for m in obj.get("non_growing", [])))


def verdict_to_json(v: Verdict) -> dict:
    return {
        "outcome": v.outcome.value,
        "required_basket": v.required_basket.token if v.required_basket else None,
        "hardcode_suspect": v.hardcode_suspect,
        "correctness": {
            "pass_count": v.correctness.pass_count,
            "total": v.correctness.total,
            "per_test": [{"status": t.status.value, "detail": t.detail}
                         for t in v.correctness.per_test],
        },
        "trace_executions": v.trace_executions,
        "trace_failures": [{"size": f.size, "kind": f.kind.value, "detail": f.detail}
                           for f in v.trace_failures],
        "classification": report_to_json(v.classification) if v.classification else None,
        "notes": list(v.notes),
    }


def verdict_from_json(obj: dict) -> Verdict:
    correctness = CorrectnessReport(tuple(
        TestOutcome(TestStatus(t["status"]), t.get("detail", ""))
        for t in obj["correctness"]["per_test"]))
    cls = obj.get("classification")
    required = obj.get("required_basket")
    return Verdict(
        Outcome(obj["outcome"]),
        correctness,
        report_from_json(cls) if cls is not None else None,
        bool(obj["hardcode_suspect"]),
        tuple(obj.get("notes", [])),
        Basket.from_token(required) if required else None,
        int(obj.get("trace_executions", 0)),
        tuple(ExecFailure(f["size"], ExecFailureKind(f["kind"]), f.get("detail", ""))
              for f in obj.get("trace_failures", [])),
    )


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"
