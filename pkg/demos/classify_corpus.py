"""
Classifying the reference corpus
================================

Runs the eleven step-counting reference algorithms at their default size
schedules and prints the chosen basket, the margin over the runner-up, and
any flags. Exponential algorithms run only up to their size caps.
"""

from tracefit import classify, run_corpus
from tracefit.classify import format_sci, margin_report
from tracefit.corpus import CORPUS

print(f"{'algorithm':<26}{'expected':<13}{'chosen':<13}{'margin':<10}flags")
for alg, entry in CORPUS.items():
    report = classify(run_corpus(alg))
    flags = ",".join(sorted(f.value for f in report.flags))
    margin = format_sci(report.margin) if report.margin is not None else "NA"
    print(f"{alg.value:<26}{entry.expected_basket.token:<13}{report.chosen_token:<13}"
          f"{margin:<10}{flags}")

###############################################################################
# The full ranking for one algorithm. Iterative merge sort is the closest
# call in the corpus: n log n beats the quadratic by about 20%.
print()
print(margin_report(classify(run_corpus("merge_sort_iterative"))))
