"""
Grading submissions end to end
==============================

An assignment asks for an O(n log n) sort. Five submissions from the test
fixtures are graded: tests run first, then each program is traced over
inputs of growing size and its step counts are classified.

Programs report their step count as the last stderr line,
``CASET_STEPS=<count>``.
"""

from pathlib import Path

from tracefit.grading import AssignmentSpec, grade

root = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
spec = AssignmentSpec.load(root / "sort_nlogn.json")
print(f"required basket: {spec.required_basket.token}; "
      f"{len(spec.tests)} tests, {len(spec.trace_inputs)} trace inputs")

for name in ("merge_sort", "bubble_sort", "hardcoded", "wrong_output", "crashes_on_large"):
    v = grade(str(root / "programs" / f"{name}.py"), spec)
    chosen = v.classification.chosen_token if v.classification else "-"
    print(f"\n{name}: {v.outcome.value}")
    print(f"  tests passed: {v.correctness.pass_count}/{v.correctness.total}, "
          f"classified: {chosen}, traced runs: {v.trace_executions}, "
          f"hardcode suspect: {v.hardcode_suspect}")
    for note in v.notes[:3]:
        print(f"  note: {note}")
