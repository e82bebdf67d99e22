"""The five parametric curve families and their complexity baskets.

Every family is written in terms of the input size ``x`` (always positive)
and uses the natural logarithm::

    LIN    a*x + b
    LOG    a*log(x + b) + c
    NLOGN  (a*x + b) * log(c*x + d)
    QUAD   a*x**2 + b*x + c
    EXP    exp(a*x + b) + c

Evaluation never produces NaN or infinity; points outside a family's domain
raise :class:`~tracefit.errors.DomainViolation` instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from tracefit._linalg import solve_normal
from tracefit.errors import DomainViolation, InsufficientData

if TYPE_CHECKING:
    from tracefit.traces import TraceSeries

LOG_ARG_MIN = 1e-12
EXP_ARG_MAX = 700.0


class Basket(enum.IntEnum):
    """Asymptotic complexity classes, ordered by growth rate."""

    LOGARITHMIC = 1
    LINEAR = 2
    LINEARITHMIC = 3
    QUADRATIC = 4
    EXPONENTIAL = 5

    @property
    def token(self) -> str:
        return _TOKENS[self]

    @classmethod
    def from_token(cls, token: str) -> "Basket":
        try:
            return _FROM_TOKEN[token.strip().lower()]
        except KeyError:
            raise ValueError(
                f"unknown basket {token!r}; expected one of {', '.join(_FROM_TOKEN)}"
            ) from None


_TOKENS = {
    Basket.LOGARITHMIC: "log",
    Basket.LINEAR: "linear",
    Basket.LINEARITHMIC: "nlogn",
    Basket.QUADRATIC: "quadratic",
    Basket.EXPONENTIAL: "exponential",
}
_FROM_TOKEN = {v: k for k, v in _TOKENS.items()}


class ModelId(str, enum.Enum):
    LIN = "LIN"
    LOG = "LOG"
    NLOGN = "NLOGN"
    QUAD = "QUAD"
    EXP = "EXP"


# ---------------------------------------------------------------------------
# Per-family kernels. Each takes (params, x-array) and returns arrays; domain
# checks happen in the wrappers below.
# ---------------------------------------------------------------------------

def _log_arg(model: str, arg: np.ndarray, x: np.ndarray, what: str) -> np.ndarray:
    bad = ~(arg > LOG_ARG_MIN)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainViolation(model, float(x[i]), f"log({what}) with argument {arg[i]!r}")
    return np.log(arg)


def _exp_arg(model: str, arg: np.ndarray, x: np.ndarray) -> np.ndarray:
    bad = ~(arg <= EXP_ARG_MAX)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainViolation(model, float(x[i]), f"exp(a*x+b) with exponent {arg[i]!r}")
    return np.exp(arg)


def _lin(p, x):
    return p[0] * x + p[1]


def _lin_jac(p, x):
    return np.column_stack([x, np.ones_like(x)])


def _log(p, x):
    return p[0] * _log_arg("LOG", x + p[1], x, "x+b") + p[2]


def _log_jac(p, x):
    L = _log_arg("LOG", x + p[1], x, "x+b")
    return np.column_stack([L, p[0] / (x + p[1]), np.ones_like(x)])


def _nlogn(p, x):
    return (p[0] * x + p[1]) * _log_arg("NLOGN", p[2] * x + p[3], x, "c*x+d")


def _nlogn_jac(p, x):
    u = p[2] * x + p[3]
    L = _log_arg("NLOGN", u, x, "c*x+d")
    lin = p[0] * x + p[1]
    return np.column_stack([x * L, L, lin * x / u, lin / u])


def _quad(p, x):
    return (p[0] * x + p[1]) * x + p[2]


def _quad_jac(p, x):
    return np.column_stack([x * x, x, np.ones_like(x)])


def _exp(p, x):
    return _exp_arg("EXP", p[0] * x + p[1], x) + p[2]


def _exp_jac(p, x):
    E = _exp_arg("EXP", p[0] * x + p[1], x)
    return np.column_stack([x * E, E, np.ones_like(x)])


@dataclass(frozen=True)
class CurveModel:
    id: ModelId
    arity: int
    basket: Basket
    linear_in_params: bool
    equation: str
    param_names: tuple[str, ...]
    _f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    _jac: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @property
    def token(self) -> str:
        return self.basket.token

    def __repr__(self) -> str:
        return f"CurveModel({self.id.value}: {self.equation})"

    def values(self, params: Sequence[float], x) -> np.ndarray:
        """Vectorized :func:`evaluate`; raises DomainViolation on any bad point."""
        p = _check_params(self, params)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._f(p, xs)
        _check_finite(self, out, xs, "value")
        return out

    def jacobian_matrix(self, params: Sequence[float], x) -> np.ndarray:
        """Rows are points, columns are partial derivatives per parameter."""
        p = _check_params(self, params)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            J = self._jac(p, xs)
        _check_finite(self, J, xs, "derivative")
        return J

    def in_domain(self, params: Sequence[float], x) -> bool:
        try:
            self.values(params, x)
        except DomainViolation:
            return False
        return True

    def scale_params(self, params: Sequence[float], k: float) -> np.ndarray:
        """Parameters reproducing ``k * f`` for ``k > 0``."""
        p = np.array(params, dtype=float)
        if k <= 0:
            raise ValueError("scale factor must be positive")
        if self.id in (ModelId.LIN, ModelId.QUAD):
            return p * k
        if self.id is ModelId.LOG:
            return np.array([p[0] * k, p[1], p[2] * k])
        if self.id is ModelId.NLOGN:
            return np.array([p[0] * k, p[1] * k, p[2], p[3]])
        return np.array([p[0], p[1] + math.log(k), p[2] * k])

    def design(self, x) -> np.ndarray:
        """Design matrix for the families that are linear in their parameters."""
        xs = np.asarray(x, dtype=float)
        if self.id is ModelId.LIN:
            return _lin_jac(None, xs)
        if self.id is ModelId.QUAD:
            return _quad_jac(None, xs)
        raise TypeError(f"{self.id.value} is not linear in its parameters")


def _check_params(model: CurveModel, params) -> np.ndarray:
    p = np.asarray(params, dtype=float).reshape(-1)
    if p.size != model.arity:
        raise ValueError(f"{model.id.value} takes {model.arity} parameters, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite parameters {p.tolist()}")
    return p


def _check_finite(model: CurveModel, arr: np.ndarray, xs: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(arr)
    if np.any(bad):
        row = int(np.argwhere(bad)[0][0])
        raise DomainViolation(model.id.value, float(xs[row]), f"{what} overflow")


LIN = CurveModel(ModelId.LIN, 2, Basket.LINEAR, True, "a*x + b", ("a", "b"), _lin, _lin_jac)
LOG = CurveModel(ModelId.LOG, 3, Basket.LOGARITHMIC, False, "a*log(x + b) + c",
                 ("a", "b", "c"), _log, _log_jac)
NLOGN = CurveModel(ModelId.NLOGN, 4, Basket.LINEARITHMIC, False, "(a*x + b)*log(c*x + d)",
                   ("a", "b", "c", "d"), _nlogn, _nlogn_jac)
QUAD = CurveModel(ModelId.QUAD, 3, Basket.QUADRATIC, True, "a*x^2 + b*x + c",
                  ("a", "b", "c"), _quad, _quad_jac)
EXP = CurveModel(ModelId.EXP, 3, Basket.EXPONENTIAL, False, "exp(a*x + b) + c",
                 ("a", "b", "c"), _exp, _exp_jac)

MODELS: dict[ModelId, CurveModel] = {m.id: m for m in (LIN, LOG, NLOGN, QUAD, EXP)}
_BY_BASKET = {m.basket: m for m in MODELS.values()}


def get_model(key: "ModelId | Basket | str") -> CurveModel:
    """Look up a model by id, basket, or basket token (``"nlogn"`` etc.)."""
    if isinstance(key, CurveModel):
        return key
    if isinstance(key, ModelId):
        return MODELS[key]
    if isinstance(key, Basket):
        return _BY_BASKET[key]
    if key.upper() in ModelId.__members__:
        return MODELS[ModelId[key.upper()]]
    return _BY_BASKET[Basket.from_token(key)]


def model_for(basket: Basket) -> CurveModel:
    return _BY_BASKET[basket]


def basket_of(model: CurveModel) -> Basket:
    return model.basket


def evaluate(model: CurveModel, params: Sequence[float], x: float) -> float:
    if not x > 0:
        raise ValueError(f"input size must be positive, got {x!r}")
    return float(model.values(params, [x])[0])


def jacobian(model: CurveModel, params: Sequence[float], x: float) -> np.ndarray:
    if not x > 0:
        raise ValueError(f"input size must be positive, got {x!r}")
    return model.jacobian_matrix(params, [x])[0]


# ---------------------------------------------------------------------------
# Initial guesses
# ---------------------------------------------------------------------------

LOG_SHIFT_GRID = (0.1, 1.0, 10.0, 100.0, 1000.0)
NLOGN_GRID = (0.1, 1.0, 10.0)
_KEEP_GRID = 3


def _sse(model: CurveModel, p: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    try:
        r = model.values(p, x) - y
    except (DomainViolation, ValueError):
        return math.inf
    s = float(r @ r)
    return s if math.isfinite(s) else math.inf


def _golden(fun: Callable[[float], float], lo: float, hi: float, iters: int = 60) -> float:
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    return c if fc <= fd else d


def _log_starts(x, y):
    def project(b):
        A = np.column_stack([np.log(x + b), np.ones_like(x)])
        a, c = solve_normal(A, y)
        return np.array([a, b, c])

    cands = [project(b) for b in LOG_SHIFT_GRID]
    refined = _golden(lambda t: _sse(LOG, project(math.exp(t)), x, y),
                      math.log(1e-3), math.log(1e6))
    cands.append(project(math.exp(refined)))
    return cands


def _nlogn_starts(x, y):
    def project(c, d):
        L = np.log(c * x + d)
        A = np.column_stack([x * L, L])
        a, b = solve_normal(A, y)
        return np.array([a, b, c, d])

    return [project(c, d) for c in NLOGN_GRID for d in NLOGN_GRID]


def _exp_starts(x, y):
    cands = []
    lo, hi = float(y.min()), float(y.max())
    spread = hi - lo
    c0 = lo - 0.05 * (spread if spread > 0 else max(1.0, abs(lo)))
    a, b = solve_normal(np.column_stack([x, np.ones_like(x)]), np.log(y - c0))
    cands.append(np.array([a, b, c0]))

    # For a fixed rate the model is linear in (exp(b), c); search the rate.
    xmax = float(x.max())

    def project(rate):
        E = np.exp(rate * (x - xmax))
        B, c = solve_normal(np.column_stack([E, np.ones_like(x)]), y)
        if not B > 0:
            return None
        return np.array([rate, math.log(B) - rate * xmax, c])

    def cost(rate):
        p = project(rate)
        return math.inf if p is None else _sse(EXP, p, x, y)

    width = max(xmax - float(x.min()), 1e-12)
    bound = min(EXP_ARG_MAX / max(xmax, 1.0), 50.0 / width)
    grid = np.linspace(-bound, bound, 41)
    costs = [cost(r) for r in grid]
    i = int(np.argmin(costs))
    if math.isfinite(costs[i]):
        left = grid[max(i - 1, 0)]
        right = grid[min(i + 1, len(grid) - 1)]
        r = _golden(cost, float(left), float(right))
        p = project(r)
        if p is not None:
            cands.append(p)
    return cands


def initial_guess(model: CurveModel, series: "TraceSeries", *, max_starts: int = 8,
                  seed: int = 0) -> list[np.ndarray]:
    return start_candidates(model, series.x, series.y, max_starts=max_starts, seed=seed)


def start_candidates(model: CurveModel, x: np.ndarray, y: np.ndarray, *, max_starts: int = 8,
                     seed: int = 0) -> list[np.ndarray]:
    """Candidate starting points for fitting ``model`` to ``series``.

    Linear-in-parameter families get their exact least-squares solution.
    The others exploit the fact that each family is linear in a subset of
    its parameters: the nonlinear subset is gridded (and, for LOG and EXP,
    refined by a one-dimensional search) while the linear subset is solved
    exactly. Remaining slots up to ``max_starts`` are filled with seeded
    jitter around the best start. Candidates are returned best-first by
    initial SSE; out-of-domain candidates are dropped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < model.arity + 1:
        raise InsufficientData(
            f"{model.id.value} needs at least {model.arity + 1} observations, got {len(x)}"
        )
    if model.linear_in_params:
        return [solve_normal(model.design(x), y)]

    with np.errstate(all="ignore"):
        if model.id is ModelId.LOG:
            raw = _log_starts(x, y)
            keep = _KEEP_GRID
        elif model.id is ModelId.NLOGN:
            raw = _nlogn_starts(x, y)
            keep = _KEEP_GRID
        else:
            raw = _exp_starts(x, y)
            keep = len(raw)

    scored = []
    for p in raw:
        if p is None or not np.all(np.isfinite(p)):
            continue
        s = _sse(model, p, x, y)
        if math.isfinite(s):
            scored.append((s, p))
    scored.sort(key=lambda t: t[0])
    starts = [p for _, p in scored[:keep]]

    ranked = scored[:keep]
    if ranked and len(ranked) < max_starts:
        rng = np.random.default_rng(seed)
        best = ranked[0][1]
        for _ in range(4 * max_starts):
            if len(ranked) >= max_starts:
                break
            p = best * np.exp(rng.normal(0.0, 0.3, size=best.size))
            s = _sse(model, p, x, y)
            if math.isfinite(s):
                ranked.append((s, p))
    ranked.sort(key=lambda t: t[0])
    return [p for _, p in ranked[:max_starts]]
