"""Step-counted reference algorithms.

Each algorithm increments a single counter on every element comparison,
every element or table-cell write, and every recursive call entry. Inputs
are generated deterministically from ``(seed, size)`` and are worst-case
where that is well defined:

* searches look for a target that is absent from the array;
* bubble sort receives a reverse-sorted array;
* merge sorts receive a seeded random permutation;
* edit distance compares two equal-length strings over disjoint alphabets.

The three exponential recursions are far too slow to execute at their
larger sizes, so their counts are obtained by aggregating identical
subtrees of the call tree: the work below a call depends only on the
call's arguments, so memoizing the *count* (never the result) reproduces
the naive recursion's counter exactly. The literal recursive versions are
kept as ``*_executed`` functions and the test-suite cross-checks the two.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from tracefit.errors import SizeCapExceeded
from tracefit.models import Basket
from tracefit.traces import Source, TraceSeries


class Counter:
    __slots__ = ("steps",)

    def __init__(self) -> None:
        self.steps = 0

    def tick(self, k: int = 1) -> None:
        self.steps += k


def _rng(seed: int, n: int) -> random.Random:
    return random.Random(f"{seed}:{n}")


# ---------------------------------------------------------------------------
# Searching
# ---------------------------------------------------------------------------

def linear_search(arr: Sequence[int], target: int, ctr: Counter) -> int:
    for i, v in enumerate(arr):
        ctr.tick()
        if v == target:
            return i
    return -1


def binary_search(arr: Sequence[int], target: int, ctr: Counter) -> int:
    lo, hi = 0, len(arr)
    while lo < hi:
        mid = (lo + hi) // 2
        ctr.tick()
        if arr[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(arr):
        ctr.tick()
        if arr[lo] == target:
            return lo
    return -1


# ---------------------------------------------------------------------------
# Sorting
# ---------------------------------------------------------------------------

def bubble_sort(arr: list[int], ctr: Counter) -> list[int]:
    a = list(arr)
    n = len(a)
    for i in range(n - 1):
        swapped = False
        for j in range(n - 1 - i):
            ctr.tick()
            if a[j] > a[j + 1]:
                a[j], a[j + 1] = a[j + 1], a[j]
                ctr.tick(2)
                swapped = True
        if not swapped:
            break
    return a


def _merge(a: list[int], lo: int, mid: int, hi: int, tmp: list[int], ctr: Counter) -> None:
    i, j, k = lo, mid, lo
    while i < mid and j < hi:
        ctr.tick()
        if a[j] < a[i]:
            tmp[k] = a[j]
            j += 1
        else:
            tmp[k] = a[i]
            i += 1
        ctr.tick()
        k += 1
    while i < mid:
        tmp[k] = a[i]
        ctr.tick()
        i += 1
        k += 1
    while j < hi:
        tmp[k] = a[j]
        ctr.tick()
        j += 1
        k += 1
    for k in range(lo, hi):
        a[k] = tmp[k]
        ctr.tick()


def merge_sort_recursive(arr: list[int], ctr: Counter) -> list[int]:
    a = list(arr)
    tmp = [0] * len(a)

    def sort(lo: int, hi: int) -> None:
        ctr.tick()
        if hi - lo < 2:
            return
        mid = (lo + hi) // 2
        sort(lo, mid)
        sort(mid, hi)
        _merge(a, lo, mid, hi, tmp, ctr)

    sort(0, len(a))
    return a


def merge_sort_iterative(arr: list[int], ctr: Counter) -> list[int]:
    a = list(arr)
    n = len(a)
    tmp = [0] * n
    width = 1
    while width < n:
        for lo in range(0, n - width, 2 * width):
            _merge(a, lo, lo + width, min(lo + 2 * width, n), tmp, ctr)
        width *= 2
    return a


# ---------------------------------------------------------------------------
# Fibonacci
# ---------------------------------------------------------------------------

def fib_recursive_executed(n: int, ctr: Counter) -> int:
    ctr.tick()
    if n < 2:
        return n
    return fib_recursive_executed(n - 1, ctr) + fib_recursive_executed(n - 2, ctr)


@lru_cache(maxsize=None)
def _fib_recursive_steps(n: int) -> int:
    if n < 2:
        return 1
    return 1 + _fib_recursive_steps(n - 1) + _fib_recursive_steps(n - 2)


def fib_dp(n: int, ctr: Counter) -> int:
    table = [0] * (n + 1)
    ctr.tick()  # table[0]
    if n >= 1:
        table[1] = 1
        ctr.tick()
    for i in range(2, n + 1):
        table[i] = table[i - 1] + table[i - 2]
        ctr.tick()
    return table[n]


# ---------------------------------------------------------------------------
# Rod cutting
# ---------------------------------------------------------------------------

def rod_cutting_recursive_executed(prices: Sequence[int], n: int, ctr: Counter) -> int:
    ctr.tick()
    if n == 0:
        return 0
    best = -1
    for i in range(1, n + 1):
        v = prices[i - 1] + rod_cutting_recursive_executed(prices, n - i, ctr)
        ctr.tick()
        if v > best:
            best = v
    return best


@lru_cache(maxsize=None)
def _rod_recursive_steps(n: int) -> int:
    return 1 + sum(1 + _rod_recursive_steps(n - i) for i in range(1, n + 1))


def rod_cutting_dp(prices: Sequence[int], n: int, ctr: Counter) -> int:
    revenue = [0] * (n + 1)
    ctr.tick()
    for j in range(1, n + 1):
        best = -1
        for i in range(1, j + 1):
            v = prices[i - 1] + revenue[j - i]
            ctr.tick()
            if v > best:
                best = v
        revenue[j] = best
        ctr.tick()
    return revenue[n]


# ---------------------------------------------------------------------------
# Edit distance
# ---------------------------------------------------------------------------

def _min3(a: int, b: int, c: int, ctr: Counter) -> int:
    ctr.tick(2)
    return min(a, b, c)


def edit_distance_recursive_executed(s: str, t: str, ctr: Counter) -> int:
    def ed(i: int, j: int) -> int:
        ctr.tick()
        if i == 0:
            return j
        if j == 0:
            return i
        ctr.tick()
        if s[i - 1] == t[j - 1]:
            return ed(i - 1, j - 1)
        return 1 + _min3(ed(i - 1, j), ed(i, j - 1), ed(i - 1, j - 1), ctr)

    return ed(len(s), len(t))


def _edit_recursive_steps(s: str, t: str) -> int:
    memo: dict[tuple[int, int], int] = {}

    def steps(i: int, j: int) -> int:
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == 0 or j == 0:
            total = 1
        elif s[i - 1] == t[j - 1]:
            total = 2 + steps(i - 1, j - 1)
        else:
            total = 4 + steps(i - 1, j) + steps(i, j - 1) + steps(i - 1, j - 1)
        memo[key] = total
        return total

    # Iterate bottom-up so deep recursion is never needed.
    for i in range(len(s) + 1):
        for j in range(len(t) + 1):
            steps(i, j)
    return memo[(len(s), len(t))]


def edit_distance_dp(s: str, t: str, ctr: Counter) -> int:
    m, n = len(s), len(t)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
        ctr.tick()
    for j in range(1, n + 1):
        d[0][j] = j
        ctr.tick()
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            ctr.tick()
            sub = 0 if s[i - 1] == t[j - 1] else 1
            d[i][j] = _min3(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + sub, ctr)
            ctr.tick()
    return d[m][n]


# ---------------------------------------------------------------------------
# Input generators and the registry
# ---------------------------------------------------------------------------

_LEFT_ALPHABET = "abcdefghijklm"
_RIGHT_ALPHABET = "nopqrstuvwxyz"


def _permutation(seed: int, n: int) -> list[int]:
    a = list(range(n))
    _rng(seed, n).shuffle(a)
    return a


def _prices(seed: int, n: int) -> list[int]:
    rng = _rng(seed, n)
    return [rng.randint(1, 10 * n) for _ in range(n)]


def _disjoint_strings(seed: int, n: int) -> tuple[str, str]:
    rng = _rng(seed, n)
    s = "".join(rng.choice(_LEFT_ALPHABET) for _ in range(n))
    t = "".join(rng.choice(_RIGHT_ALPHABET) for _ in range(n))
    return s, t


def _run_linear_search(n: int, seed: int) -> int:
    ctr = Counter()
    linear_search(_permutation(seed, n), -1, ctr)
    return ctr.steps


def _run_binary_search(n: int, seed: int) -> int:
    ctr = Counter()
    # The midpoint rounds down, so the left half is never smaller: an absent
    # target below every key takes the longest probe path.
    binary_search(list(range(0, 2 * n, 2)), -1, ctr)
    return ctr.steps


def _run_bubble_sort(n: int, seed: int) -> int:
    ctr = Counter()
    bubble_sort(list(range(n, 0, -1)), ctr)
    return ctr.steps


def _run_merge_iterative(n: int, seed: int) -> int:
    ctr = Counter()
    merge_sort_iterative(_permutation(seed, n), ctr)
    return ctr.steps


def _run_merge_recursive(n: int, seed: int) -> int:
    ctr = Counter()
    merge_sort_recursive(_permutation(seed, n), ctr)
    return ctr.steps


def _run_fib_recursive(n: int, seed: int) -> int:
    return _fib_recursive_steps(n)


def _run_fib_dp(n: int, seed: int) -> int:
    ctr = Counter()
    fib_dp(n, ctr)
    return ctr.steps


def _run_rod_dp(n: int, seed: int) -> int:
    ctr = Counter()
    rod_cutting_dp(_prices(seed, n), n, ctr)
    return ctr.steps


def _run_rod_recursive(n: int, seed: int) -> int:
    return _rod_recursive_steps(n)


def _run_edit_dp(n: int, seed: int) -> int:
    ctr = Counter()
    edit_distance_dp(*_disjoint_strings(seed, n), ctr)
    return ctr.steps


def _run_edit_recursive(n: int, seed: int) -> int:
    return _edit_recursive_steps(*_disjoint_strings(seed, n))


class Algorithm(str, enum.Enum):
    LINEAR_SEARCH = "linear_search"
    BINARY_SEARCH = "binary_search"
    BUBBLE_SORT = "bubble_sort"
    MERGE_SORT_ITERATIVE = "merge_sort_iterative"
    MERGE_SORT_RECURSIVE = "merge_sort_recursive"
    FIB_RECURSIVE = "fib_recursive"
    FIB_DP = "fib_dp"
    ROD_CUTTING_DP = "rod_cutting_dp"
    ROD_CUTTING_RECURSIVE = "rod_cutting_recursive"
    EDIT_DISTANCE_DP = "edit_distance_dp"
    EDIT_DISTANCE_RECURSIVE = "edit_distance_recursive"


@dataclass(frozen=True)
class CorpusEntry:
    algorithm: Algorithm
    title: str
    expected_basket: Basket
    runner: Callable[[int, int], int]
    size_cap: int | None = None

    @property
    def default_sizes(self) -> list[int]:
        if self.size_cap is not None:
            return list(range(5, self.size_cap + 1))
        return list(range(5, 101, 5))


CORPUS: dict[Algorithm, CorpusEntry] = {
    e.algorithm: e
    for e in [
        CorpusEntry(Algorithm.LINEAR_SEARCH, "Linear Search", Basket.LINEAR, _run_linear_search),
        CorpusEntry(Algorithm.BINARY_SEARCH, "Binary Search", Basket.LOGARITHMIC,
                    _run_binary_search),
        CorpusEntry(Algorithm.BUBBLE_SORT, "Bubble Sort", Basket.QUADRATIC, _run_bubble_sort),
        CorpusEntry(Algorithm.MERGE_SORT_ITERATIVE, "Iterative Merge Sort", Basket.LINEARITHMIC,
                    _run_merge_iterative),
        CorpusEntry(Algorithm.MERGE_SORT_RECURSIVE, "Recursive Merge Sort", Basket.LINEARITHMIC,
                    _run_merge_recursive),
        CorpusEntry(Algorithm.FIB_RECURSIVE, "Recursive Fibonacci", Basket.EXPONENTIAL,
                    _run_fib_recursive, size_cap=30),
        CorpusEntry(Algorithm.FIB_DP, "DP Fibonacci", Basket.LINEAR, _run_fib_dp),
        CorpusEntry(Algorithm.ROD_CUTTING_DP, "DP Rod Cutting Problem", Basket.QUADRATIC,
                    _run_rod_dp),
        CorpusEntry(Algorithm.ROD_CUTTING_RECURSIVE, "Recursive Rod Cutting Problem",
                    Basket.EXPONENTIAL, _run_rod_recursive, size_cap=22),
        CorpusEntry(Algorithm.EDIT_DISTANCE_DP, "DP Edit Distance Problem", Basket.QUADRATIC,
                    _run_edit_dp),
        CorpusEntry(Algorithm.EDIT_DISTANCE_RECURSIVE, "Recursive Edit Distance Problem",
                    Basket.EXPONENTIAL, _run_edit_recursive, size_cap=12),
    ]
}


def get_algorithm(token: "str | Algorithm") -> CorpusEntry:
    try:
        return CORPUS[Algorithm(token)]
    except ValueError:
        raise ValueError(
            f"unknown algorithm {token!r}; expected one of {', '.join(a.value for a in Algorithm)}"
        ) from None


def run_corpus(algorithm: "str | Algorithm", sizes: Iterable[int] | None = None,
               seed: int = 0) -> TraceSeries:
    """Step counts of a corpus algorithm at each requested input size."""
    entry = get_algorithm(algorithm)
    sizes = entry.default_sizes if sizes is None else list(sizes)
    if not sizes:
        raise ValueError("sizes must be non-empty")
    for n in sizes:
        if isinstance(n, bool) or not isinstance(n, int) or n <= 0:
            raise ValueError(f"sizes must be positive integers, got {n!r}")
        if entry.size_cap is not None and n > entry.size_cap:
            raise SizeCapExceeded(
                f"{entry.algorithm.value} is capped at size {entry.size_cap}, got {n}"
            )
    points = tuple((n, entry.runner(n, seed)) for n in sizes)
    return TraceSeries(points, Source.CORPUS, entry.algorithm.value)
