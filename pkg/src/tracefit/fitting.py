"""Least-squares fitting of curve models to trace series.

Families that are linear in their parameters (LIN, QUAD) are solved in
closed form. The others run Levenberg-Marquardt from several starts
produced by :func:`tracefit.models.initial_guess`. Costs are divided by
``max|y|`` while iterating and the parameters are mapped back afterwards,
so a trace measured in units of 1 or 1e11 converges the same way. The
reported MSE is always in the original cost units.

When no start produces usable parameters the result is a
:class:`FitFailure` instead of a :class:`FitResult`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tracefit._linalg import solve_normal
from tracefit.errors import DomainViolation, InsufficientData
from tracefit.models import CurveModel, ModelId, get_model, start_candidates
from tracefit.traces import TraceSeries

MAX_DAMPING = 1e12
# Orthogonality (cosine) below which a stalled start still counts as stationary.
STALL_COSINE = 1e-6
MSE_OVERFLOW = "mean squared error overflows double precision"


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 200
    sse_rel_tol: float = 1e-10
    grad_tol: float = 1e-12
    initial_damping: float = 1e-3
    damping_factor: float = 10.0
    max_starts: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.max_starts < 1:
            raise ValueError("max_starts must be at least 1")
        for name in ("sse_rel_tol", "grad_tol", "initial_damping"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.damping_factor > 1:
            raise ValueError("damping_factor must exceed 1")


class FailureReason(str, enum.Enum):
    NO_VALID_START = "NoValidStart"
    DIVERGED = "Diverged"
    INSUFFICIENT_DATA = "InsufficientData"
    DOMAIN_UNSATISFIABLE = "DomainUnsatisfiable"


@dataclass(frozen=True)
class FitResult:
    model_id: ModelId
    params: tuple[float, ...]
    mse: float
    iterations: int
    start_index: int
    converged: bool

    ok = True

    @property
    def model(self) -> CurveModel:
        return get_model(self.model_id)


@dataclass(frozen=True)
class FitFailure:
    model_id: ModelId
    reason: FailureReason
    detail: str = ""

    ok = False

    @property
    def model(self) -> CurveModel:
        return get_model(self.model_id)


def mse(model: CurveModel, params: Sequence[float], series: TraceSeries) -> float:
    """Mean squared error of ``model(params)`` over ``series``."""
    return mean_square(model.values(params, series.x) - series.y)


# ---------------------------------------------------------------------------
# Levenberg-Marquardt
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LMStep:
    params: np.ndarray
    sse: float
    accepted: bool
    delta: np.ndarray


def _residual(model: CurveModel, p: np.ndarray, x: np.ndarray, y: np.ndarray):
    """Residual vector ``y - f`` and its SSE, or ``(None, inf)`` off-domain."""
    try:
        r = y - model.values(p, x)
    except DomainViolation:
        return None, math.inf
    with np.errstate(over="ignore"):
        sse = float(r @ r)
    return (r, sse) if math.isfinite(sse) else (None, math.inf)


def _solve_damped(J: np.ndarray, r: np.ndarray, damping: float) -> np.ndarray:
    A = J.T @ J
    g = J.T @ r
    d = np.diag(A).copy()
    floor = 1e-15 * max(float(d.max()), 1e-300)
    d[d < floor] = floor
    M = A + damping * np.diag(d)
    try:
        delta = np.linalg.solve(M, g)
    except np.linalg.LinAlgError:
        delta = np.linalg.lstsq(M, g, rcond=None)[0]
    return delta


def _cosine(J: np.ndarray, r: np.ndarray) -> float:
    """Largest |cos| between the residual and a Jacobian column."""
    rn = float(np.linalg.norm(r))
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(J, axis=0)
    g = np.abs(J.T @ r)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(cn > 0, g / (cn * rn), 0.0)
    return float(c.max())


def lm_step(model: CurveModel, params: Sequence[float], series: TraceSeries,
            damping: float) -> LMStep:
    """One damped Gauss-Newton step.

    Solves ``(J'J + damping * diag(J'J)) delta = J'r`` and accepts the step
    only if it strictly lowers the SSE. A rejected step returns the input
    parameters and SSE unchanged.
    """
    p = np.asarray(params, dtype=float)
    x, y = series.x, series.y
    r, sse = _residual(model, p, x, y)
    if r is None:
        raise DomainViolation(model.id.value, float("nan"), "starting point off-domain")
    J = model.jacobian_matrix(p, x)
    delta = _solve_damped(J, r, damping)
    p_new = p + delta
    _, sse_new = _residual(model, p_new, x, y) if np.all(np.isfinite(p_new)) else (None, math.inf)
    if sse_new < sse:
        return LMStep(p_new, sse_new, True, delta)
    return LMStep(p, sse, False, delta)


@dataclass
class LMRun:
    params: np.ndarray
    sse: float
    iterations: int
    converged: bool
    status: str
    history: list[float] = field(default_factory=list)


def levenberg_marquardt(model: CurveModel, x: np.ndarray, y: np.ndarray, p0: np.ndarray,
                        options: FitOptions) -> LMRun:
    """Iterate from ``p0``; ``history`` holds the SSE after every accepted step."""
    p = np.asarray(p0, dtype=float)
    r, sse = _residual(model, p, x, y)
    if r is None:
        return LMRun(p, math.inf, 0, False, "off-domain start")
    J = model.jacobian_matrix(p, x)
    damping = options.initial_damping
    history = [sse]
    accepted_any = False
    it = 0
    while True:
        if sse == 0.0 or _cosine(J, r) <= options.grad_tol:
            return LMRun(p, sse, it, True, "stationary", history)
        if it >= options.max_iterations:
            return LMRun(p, sse, it, False, "iteration limit", history)
        it += 1
        delta = _solve_damped(J, r, damping)
        p_new = p + delta
        if np.all(np.isfinite(p_new)):
            r_new, sse_new = _residual(model, p_new, x, y)
        else:
            r_new, sse_new = None, math.inf
        if sse_new < sse:
            improvement = (sse - sse_new) / sse
            p, r, sse = p_new, r_new, sse_new
            try:
                J = model.jacobian_matrix(p, x)
            except DomainViolation:
                return LMRun(p, sse, it, False, "jacobian off-domain", history)
            history.append(sse)
            accepted_any = True
            damping = max(damping / options.damping_factor, 1e-15)
            if improvement <= options.sse_rel_tol:
                return LMRun(p, sse, it, True, "sse tolerance", history)
        else:
            damping *= options.damping_factor
            if damping > MAX_DAMPING:
                if accepted_any or _cosine(J, r) <= STALL_COSINE:
                    return LMRun(p, sse, it, True, "no further decrease", history)
                return LMRun(p, sse, it, False, "diverged", history)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def fit(model: "CurveModel | str", series: TraceSeries,
        options: FitOptions | None = None) -> FitResult | FitFailure:
    """Fit one family; never raises on pathological data."""
    model = get_model(model)
    options = options or FitOptions()
    x, y = series.x, series.y
    n = len(x)
    if n < model.arity + 1 or series.distinct_sizes < 2:
        return FitFailure(model.id, FailureReason.INSUFFICIENT_DATA,
                          f"need {model.arity + 1} points over 2+ sizes, got {n} "
                          f"over {series.distinct_sizes}")

    if model.linear_in_params:
        p = solve_normal(model.design(x), y)
        value = mean_square(model.values(p, x) - y)
        if not math.isfinite(value):
            return FitFailure(model.id, FailureReason.DIVERGED, MSE_OVERFLOW)
        return FitResult(model.id, tuple(float(v) for v in p), value, 0, 0, True)

    scale = float(np.max(np.abs(y)))
    if not scale > 0:
        scale = 1.0
    ys = y / scale
    try:
        starts = start_candidates(model, x, ys, max_starts=options.max_starts,
                                  seed=options.rng_seed)
    except InsufficientData as exc:
        return FitFailure(model.id, FailureReason.INSUFFICIENT_DATA, str(exc))
    if not starts:
        return FitFailure(model.id, FailureReason.NO_VALID_START,
                          "no candidate start lies inside the model's domain")

    runs = [levenberg_marquardt(model, x, ys, p0, options) for p0 in starts]
    finished = [(i, run) for i, run in enumerate(runs) if math.isfinite(run.sse)]
    converged = [(i, run) for i, run in finished if run.converged]
    capped = [(i, run) for i, run in finished if run.status == "iteration limit"]
    pool = converged or capped
    if not pool:
        return FitFailure(model.id, FailureReason.DIVERGED,
                          f"all {len(starts)} starts failed to decrease the error")

    domain_errors = overflows = 0
    for i, run in sorted(pool, key=lambda t: (t[1].sse, t[0])):
        params = model.scale_params(run.params, scale)
        try:
            value = mean_square(model.values(params, x) - y)
        except DomainViolation:
            domain_errors += 1
            continue
        if not math.isfinite(value):
            overflows += 1
            continue
        return FitResult(model.id, tuple(float(v) for v in params), value,
                         run.iterations, i, run.converged)
    if overflows and not domain_errors:
        return FitFailure(model.id, FailureReason.DIVERGED, MSE_OVERFLOW)
    return FitFailure(model.id, FailureReason.DOMAIN_UNSATISFIABLE,
                      f"{domain_errors} solutions leave the domain in original cost units")


def mean_square(r: np.ndarray) -> float:
    """Mean of r**2, scaled so it overflows only when the true value does."""
    m = float(np.max(np.abs(r))) if r.size else 0.0
    if m == 0.0:
        return 0.0
    if not math.isfinite(m):
        return math.inf
    with np.errstate(over="ignore"):
        return float(m * m * np.mean((r / m) ** 2))
