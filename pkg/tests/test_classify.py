import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fixture_series
from tracefit.classify import (ALL_BASKETS, ClassificationReport, Flag, candidate_set, classify,
                               format_sci, margin_report, parse_candidates, ranking)
from tracefit.corpus import run_corpus
from tracefit.errors import InsufficientData
from tracefit.fitting import FailureReason, FitFailure, FitResult
from tracefit.models import Basket, ModelId
from tracefit.traces import TraceSeries

L, LIN, NL, Q, E = (Basket.LOGARITHMIC, Basket.LINEAR, Basket.LINEARITHMIC, Basket.QUADRATIC,
                    Basket.EXPONENTIAL)


# -- examples -----------------------------------------------------------------

def test_bubble_sort_is_quadratic():
    s = run_corpus("bubble_sort", range(5, 61, 5))
    assert classify(s, [LIN, NL, Q]).chosen is Q


def test_exact_line_prefers_linear_over_quadratic():
    s = TraceSeries.from_arrays(range(1, 21), [3 * x + 1 for x in range(1, 21)])
    rep = classify(s, [LIN, Q])
    assert rep.chosen is LIN
    assert Flag.AMBIGUOUS in rep.flags
    assert rep.margin >= 1


def test_recursive_fibonacci_exponential_margin():
    rep = classify(run_corpus("fib_recursive"), [LIN, E])
    assert rep.chosen is E
    assert rep.margin >= 10


def test_recursive_merge_sort_margin():
    rep = classify(run_corpus("merge_sort_recursive"), [LIN, NL, Q])
    assert rep.chosen is NL
    assert rep.fit_for(Q).mse / rep.fit_for(NL).mse >= 2


def test_iterative_merge_sort_ranking():
    order = [e.basket for e in ranking(classify(run_corpus("merge_sort_iterative")))]
    assert order.index(NL) < order.index(Q) < len(order)
    assert order.index(NL) < order.index(LIN)


def _report(per_model):
    return ClassificationReport(per_model, None, None, frozenset())


def test_ranking_by_mse():
    rep = _report({ModelId.LIN: FitResult(ModelId.LIN, (1, 2), 4.0, 0, 0, True),
                   ModelId.QUAD: FitResult(ModelId.QUAD, (1, 2, 3), 2.0, 0, 0, True)})
    assert [e.model_id for e in ranking(rep)] == [ModelId.QUAD, ModelId.LIN]


def test_failures_ranked_last_with_reason():
    rep = _report({ModelId.LOG: FitFailure(ModelId.LOG, FailureReason.DIVERGED, "no luck"),
                   ModelId.LIN: FitResult(ModelId.LIN, (1, 2), 4.0, 0, 0, True),
                   ModelId.QUAD: FitResult(ModelId.QUAD, (1, 2, 3), 2.0, 0, 0, True)})
    order = ranking(rep)
    assert order[-1].model_id is ModelId.LOG
    text = margin_report(rep).splitlines()
    assert "NA (Diverged: no luck)" in text[-1]


# -- invariants ---------------------------------------------------------------

@pytest.mark.parametrize("k", [0.5, 3.0, 1e6])
def test_scale_invariance_on_fixture_series(k):
    for s in fixture_series(20):
        a, b = classify(s), classify(s.scaled(k))
        assert (a.chosen, a.flags) == (b.chosen, b.flags), s.label
        if a.margin is not None and math.isfinite(a.margin):
            assert b.margin == pytest.approx(a.margin, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 1e4), st.floats(0, 1e4), st.integers(8, 25))
def test_containment_line_in_quadratic(a, b, n):
    s = TraceSeries.from_arrays(range(1, n + 1), [a * x + b for x in range(1, n + 1)])
    assert classify(s, [LIN, Q]).chosen is LIN


def test_containment_log_in_nlogn():
    x = np.arange(5, 101, 5)
    s = TraceSeries.from_arrays(x, 50 * np.log(x + 3.0) + 10)
    assert classify(s, [L, NL]).chosen is L


def test_all_fits_failed_is_unclassifiable():
    s = TraceSeries.from_arrays(range(1, 21), [0.0] * 19 + [1e200])
    rep = classify(s, [LIN, Q])
    assert rep.chosen is None and rep.unclassifiable
    assert rep.flags == {Flag.ALL_FITS_FAILED}
    assert rep.chosen_token == "Unclassifiable"
    assert rep.margin is None


def test_chosen_never_from_failed_fit():
    for s in fixture_series(20):
        rep = classify(s)
        assert rep.fit_for(rep.chosen).ok


def test_near_constant():
    s = TraceSeries.from_arrays(range(1, 21), [1000.0] * 20)
    rep = classify(s)
    assert Flag.NEAR_CONSTANT in rep.flags
    assert rep.chosen is L or rep.chosen is LIN


def test_single_candidate():
    rep = classify(run_corpus("bubble_sort"), [E])
    assert rep.chosen in (E, None)
    assert rep.margin is None


def test_determinism():
    s = run_corpus("edit_distance_dp")
    assert classify(s) == classify(s)


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        classify(TraceSeries.from_arrays([1, 2, 3, 4], [1.0, 2, 3, 4]), ALL_BASKETS)
    with pytest.raises(InsufficientData):
        classify(TraceSeries.from_arrays([3] * 6, [1.0] * 6), [LIN])


# -- candidate sets and formatting ------------------------------------------------

def test_candidate_set_rules():
    assert candidate_set(["quadratic", "linear"]) == (LIN, Q)
    assert parse_candidates("linear, nlogn,quadratic") == (LIN, NL, Q)
    with pytest.raises(ValueError):
        candidate_set([])
    with pytest.raises(ValueError):
        candidate_set(["linear", "linear"])
    with pytest.raises(ValueError):
        parse_candidates("")
    with pytest.raises(ValueError):
        parse_candidates("linear,cubic")


@pytest.mark.parametrize("v,text", [(447.0, "4.47e2"), (0.0, "0.00e0"), (math.inf, "inf"),
                                    (-1.37e5, "-1.37e5"), (4.96e-25, "4.96e-25"),
                                    (1.0, "1.00e0")])
def test_format_sci(v, text):
    assert format_sci(v) == text
