"""Assign a trace series to the complexity basket whose curve fits best.

Every candidate family is fitted and the basket with the least MSE wins,
with three refinements:

* fits within 1% of the best MSE (or both at the numerical noise floor) are
  ties; the asymptotically smaller basket is chosen and ``Ambiguous`` is set;
* a fit whose leading growth term is materially negative (a concave
  "quadratic", an ``x log x`` term with negative weight, a decaying
  exponential) does not describe growth in its basket, so it is reported but
  not eligible to be chosen while a growing fit exists;
* ``NearConstant`` marks traces whose best curve is essentially flat.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from tracefit.errors import InsufficientData
from tracefit.fitting import FitFailure, FitOptions, FitResult, fit, mean_square
from tracefit.models import Basket, CurveModel, ModelId, get_model, model_for
from tracefit.traces import TraceSeries

TIE_REL = 0.01
# MSE below this fraction of mean(y^2) is indistinguishable from an exact fit.
NOISE_FLOOR_REL = 1e-22
NEAR_CONSTANT_REL = 1e-6
# Negative leading terms smaller than this fraction of max|y| are rounding noise.
GROWTH_TOL_REL = 1e-9

ALL_BASKETS: tuple[Basket, ...] = tuple(Basket)


class Flag(str, enum.Enum):
    AMBIGUOUS = "Ambiguous"
    NEAR_CONSTANT = "NearConstant"
    ALL_FITS_FAILED = "AllFitsFailed"


UNCLASSIFIABLE = "Unclassifiable"


def candidate_set(baskets: Iterable["Basket | str"]) -> tuple[Basket, ...]:
    """Validate a candidate set and return it ordered by rank."""
    out = []
    for b in baskets:
        basket = b if isinstance(b, Basket) else Basket.from_token(b)
        if basket in out:
            raise ValueError(f"duplicate candidate {basket.token!r}")
        out.append(basket)
    if not out:
        raise ValueError("candidate set must not be empty")
    return tuple(sorted(out))


def parse_candidates(text: str) -> tuple[Basket, ...]:
    tokens = [t for t in (p.strip() for p in text.split(",")) if t]
    return candidate_set(tokens)


@dataclass(frozen=True)
class ClassificationReport:
    per_model: Mapping[ModelId, "FitResult | FitFailure"]
    chosen: Basket | None
    margin: float | None
    flags: frozenset[Flag]
    non_growing: tuple[ModelId, ...] = ()

    @property
    def chosen_token(self) -> str:
        return self.chosen.token if self.chosen is not None else UNCLASSIFIABLE

    @property
    def unclassifiable(self) -> bool:
        return self.chosen is None

    def fit_for(self, basket: Basket) -> "FitResult | FitFailure":
        return self.per_model[model_for(basket).id]


def _leading_term_negative(res: FitResult, x: np.ndarray, y_max: float) -> bool:
    a = res.params[0]
    if a >= 0:
        return False
    p = res.params
    xm = float(x.max())
    mid = res.model_id
    if mid is ModelId.LIN:
        size = abs(a) * xm
    elif mid is ModelId.QUAD:
        size = abs(a) * xm * xm
    elif mid is ModelId.LOG:
        size = abs(a) * abs(math.log(xm + p[1]))
    elif mid is ModelId.NLOGN:
        size = abs(a) * xm * abs(math.log(p[2] * xm + p[3]))
    else:
        e = np.exp(a * x + p[1])
        size = float(e.max() - e.min())
    return size > GROWTH_TOL_REL * y_max


def classify(series: TraceSeries, candidates: Iterable["Basket | str"] = ALL_BASKETS,
             options: FitOptions | None = None) -> ClassificationReport:
    baskets = candidate_set(candidates)
    models = [model_for(b) for b in baskets]
    need = max(m.arity for m in models) + 1
    if len(series) < need:
        raise InsufficientData(f"classification needs at least {need} observations, "
                               f"got {len(series)}")
    if series.distinct_sizes < 2:
        raise InsufficientData("classification needs at least two distinct input sizes")
    options = options or FitOptions()

    per_model = {m.id: fit(m, series, options) for m in models}
    ok = [r for r in per_model.values() if r.ok]
    if not ok:
        return ClassificationReport(per_model, None, None, frozenset({Flag.ALL_FITS_FAILED}))

    x, y = series.x, series.y
    y_max = float(np.max(np.abs(y)))
    non_growing = tuple(r.model_id for r in ok if _leading_term_negative(r, x, y_max))
    eligible = [r for r in ok if r.model_id not in non_growing] or ok

    with np.errstate(over="ignore"):
        floor = NOISE_FLOOR_REL * mean_square(y)
    best = min(r.mse for r in eligible)
    tied = [r for r in eligible if r.mse <= best * (1 + TIE_REL) or r.mse <= floor]
    winner = min(tied, key=lambda r: r.model.basket)
    flags = set()
    if len(tied) > 1:
        flags.add(Flag.AMBIGUOUS)

    # MSEs below the floor are rounding noise, so they count as the floor itself.
    ordered = sorted(max(r.mse, floor) for r in eligible)
    margin = None
    if len(ordered) >= 2:
        first, second = ordered[0], ordered[1]
        if first == second:
            margin = 1.0
        elif first == 0:
            margin = math.inf
        else:
            margin = second / first

    fitted = winner.model.values(winner.params, x)
    if float(fitted.max() - fitted.min()) <= NEAR_CONSTANT_REL * y_max:
        flags.add(Flag.NEAR_CONSTANT)

    return ClassificationReport(per_model, winner.model.basket, margin, frozenset(flags),
                                non_growing)


@dataclass(frozen=True)
class RankEntry:
    model_id: ModelId
    basket: Basket
    mse: float | None
    reason: str | None
    non_growing: bool = False


def ranking(report: ClassificationReport) -> list[RankEntry]:
    """Fits by ascending MSE (ties by rank), then failures in rank order."""
    fits, fails = [], []
    for mid, res in report.per_model.items():
        model = get_model(mid)
        if res.ok:
            fits.append(RankEntry(mid, model.basket, res.mse, None, mid in report.non_growing))
        else:
            detail = f"{res.reason.value}: {res.detail}" if res.detail else res.reason.value
            fails.append(RankEntry(mid, model.basket, None, detail))
    fits.sort(key=lambda e: (e.mse, e.basket))
    fails.sort(key=lambda e: e.basket)
    return fits + fails


def margin_report(report: ClassificationReport) -> str:
    lines = [f"chosen: {report.chosen_token}"]
    if report.margin is not None:
        lines.append(f"margin: {format_sci(report.margin)}")
    if report.flags:
        lines.append("flags: " + ", ".join(sorted(f.value for f in report.flags)))
    for i, e in enumerate(ranking(report), start=1):
        model = get_model(e.model_id)
        if e.mse is None:
            lines.append(f"{i}. {e.basket.token:<12} {model.equation:<24} NA ({e.reason})")
        else:
            note = "  [non-growing]" if e.non_growing else ""
            lines.append(f"{i}. {e.basket.token:<12} {model.equation:<24} "
                         f"mse={format_sci(e.mse)}{note}")
    return "\n".join(lines)


def format_sci(v: float) -> str:
    """Three significant digits in scientific notation, e.g. ``4.47e2``."""
    if v is None:
        return "NA"
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0:
        return "0.00e0"
    mant, exp = f"{v:.2e}".split("e")
    return f"{mant}e{int(exp)}"
