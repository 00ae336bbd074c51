"""Exhaustive checks of the expansion theorems on small finite spaces.

Self-maps of an n-point space are scanned in full (all n**n tables,
vectorised with numpy) while that fits the budget.  Larger spaces fall back
to a backtracking search over injective maps: an expansive map of a finite
space is injective, since distinct points are at positive distance and that
distance may not shrink to zero.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator

import numpy as np

from .expansion_analysis import ExpansionClass, Tag, classify
from .gallery import counterexample_space
from .metric_core import (
    DomainError,
    FiniteMetricSpace,
    MetricOracle,
    SelfMap,
    diameter,
    min_epsilon_net,
    validate_metric,
)

DEFAULT_BUDGET = 7 ** 7
PRUNED_MAX = 12
_CHUNK = 1 << 17


class BudgetExceeded(RuntimeError):
    def __init__(self, n: int, required: int, budget: int):
        super().__init__(f"{n}-point space needs {required} maps, budget is {budget}")
        self.n = n
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class TaggedMap:
    map: SelfMap
    cls: ExpansionClass

    def to_json_obj(self) -> dict:
        return {"image": list(self.map.table), **self.cls.to_json_obj()}


def _comparison_matrix(space: FiniteMetricSpace, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """(image-side, domain-side) matrices; expansive iff image >= domain pairwise."""
    if space.exact:
        m = space.integer_matrix()
        return m, m
    a = space.as_array()
    return a, a * (1 - tol)


def _scan_partition(args) -> list[tuple[int, ...]]:
    img, dom, n, first, lo, hi = args
    pairs = list(itertools.combinations(range(n), 2))
    found = []
    # codes enumerate maps with T(0) fixed to ``first``: digit k is T(k+1)
    for start in range(lo, hi, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, hi), dtype=np.int64)
        tables = np.empty((codes.size, n), dtype=np.int64)
        tables[:, 0] = first
        rest = codes
        for k in range(1, n):
            rest, tables[:, k] = np.divmod(rest, n)
        ok = np.ones(codes.size, dtype=bool)
        for i, j in pairs:
            ok &= img[tables[:, i], tables[:, j]] >= dom[i, j]
        found.extend(tuple(int(v) for v in row) for row in tables[ok])
    return found


def _full_scan(space: FiniteMetricSpace, tol: float, workers: int = 1) -> list[tuple[int, ...]]:
    n = space.n
    img, dom = _comparison_matrix(space, tol)
    per = n ** (n - 1)
    jobs = [(img, dom, n, first, 0, per) for first in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_partition, jobs))
    else:
        parts = [_scan_partition(j) for j in jobs]
    found = [t for part in parts for t in part]
    # lexicographic order on tables, independent of worker count
    return sorted(found)


def _pruned_scan(space: FiniteMetricSpace, tol: float) -> list[tuple[int, ...]]:
    n = space.n
    img, dom = _comparison_matrix(space, tol)
    img = img.tolist()
    dom = dom.tolist()
    found = []
    table = [0] * n
    used = [False] * n

    def extend(k: int):
        if k == n:
            found.append(tuple(table))
            return
        for t in range(n):
            if used[t]:
                continue
            if all(img[t][table[i]] >= dom[k][i] for i in range(k)):
                table[k] = t
                used[t] = True
                extend(k + 1)
                used[t] = False

    extend(0)
    return found


@dataclass(frozen=True)
class ScanResult:
    tables: tuple[tuple[int, ...], ...]
    method: str      # "full" or "pruned-injective"
    maps_covered: int


def scan_expansive(space: FiniteMetricSpace, budget: int = DEFAULT_BUDGET,
                   tol: float | None = None, pruned_max: int = PRUNED_MAX,
                   workers: int = 1) -> ScanResult:
    """Tables of every expansive self-map of ``space``."""
    n = space.n
    tol = space.default_tol(tol)
    if n == 0:
        return ScanResult((), "full", 1)
    required = n ** n
    if required <= budget:
        return ScanResult(tuple(_full_scan(space, tol, workers)), "full", required)
    if n <= pruned_max:
        return ScanResult(tuple(_pruned_scan(space, tol)), "pruned-injective", required)
    raise BudgetExceeded(n, required, budget)


def _tag(space: FiniteMetricSpace, table: tuple[int, ...], tol: float | None) -> ExpansionClass:
    if space.n < 2:
        return ExpansionClass(Tag.ISOMETRY)
    return classify(space, SelfMap(table=table), tol)


def enumerate_expansive_maps(space: FiniteMetricSpace, budget: int = DEFAULT_BUDGET,
                             tol: float | None = None, workers: int = 1) -> list[TaggedMap]:
    scan = scan_expansive(space, budget, tol, workers=workers)
    return [TaggedMap(SelfMap(table=t), _tag(space, t, tol)) for t in scan.tables]


# recurrence

@dataclass(frozen=True)
class RecurrenceResult:
    found: bool
    n: int | None
    distance: Any
    best_n: int
    best_distance: Any

    def to_json_obj(self) -> dict:
        conv = (lambda v: str(v) if isinstance(v, Fraction) else v)
        return {"found": self.found, "n": self.n, "distance": conv(self.distance),
                "best_n": self.best_n, "best_distance": conv(self.best_distance)}


def recurrence_search(space: FiniteMetricSpace | MetricOracle | Callable[[Any, Any], Any],
                      map: Callable[[Any], Any], x, epsilon, max_iter: int) -> RecurrenceResult:
    """Smallest n in [1, max_iter] with d(x, T^n x) <= epsilon.

    ``space`` supplies the distance: a finite space (points are indices),
    an oracle, or a bare distance function.
    """
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    if max_iter < 1:
        raise DomainError("max_iter must be positive")
    if isinstance(space, FiniteMetricSpace):
        dist = space.d
    elif isinstance(space, MetricOracle):
        dist = space.distance
    else:
        dist = space
    y = x
    best_n, best_d = None, None
    for n in range(1, max_iter + 1):
        y = map(y)
        d = dist(x, y)
        if best_d is None or d < best_d:
            best_n, best_d = n, d
        if d <= epsilon:
            return RecurrenceResult(True, n, d, n, d)
    return RecurrenceResult(False, None, None, best_n, best_d)


def cycle_lengths(table: tuple[int, ...]) -> list[int]:
    seen = [False] * len(table)
    out = []
    for s in range(len(table)):
        if seen[s]:
            continue
        k, x = 0, s
        while not seen[x]:
            seen[x] = True
            x = table[x]
            k += 1
        out.append(k)
    return out


# compact theorem

@dataclass(frozen=True)
class EnumerationReport:
    n: int
    maps_scanned: int
    expansive_count: int
    all_expansive_are_isometric_bijections: bool
    counterexample: tuple[int, ...] | None
    method: str
    sum_preserved: bool = True
    recurrence_ok: bool = True
    no_anticontraction: bool | None = None
    tags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.all_expansive_are_isometric_bijections and self.sum_preserved
                and self.recurrence_ok and self.no_anticontraction is not False)

    def to_json_obj(self) -> dict:
        return {"n": self.n, "maps_scanned": self.maps_scanned,
                "expansive_count": self.expansive_count,
                "all_expansive_are_isometric_bijections":
                    self.all_expansive_are_isometric_bijections,
                "counterexample": list(self.counterexample) if self.counterexample else None,
                "method": self.method, "sum_preserved": self.sum_preserved,
                "recurrence_ok": self.recurrence_ok,
                "no_anticontraction": self.no_anticontraction,
                "tags": dict(sorted(self.tags.items()))}


def _pair_sum(space: FiniteMetricSpace, table) -> Any:
    return sum(space.dist[table[i]][table[j]]
               for i, j in itertools.combinations(range(space.n), 2))


def verify_compact_theorem(space: FiniteMetricSpace, budget: int = DEFAULT_BUDGET,
                           tol: float | None = None, cross_checks: bool = True,
                           workers: int = 1) -> EnumerationReport:
    """Every expansive self-map of a finite space is a bijective isometry.

    With ``cross_checks`` also verifies, per expansive map, that the sum of
    all pairwise distances is preserved and that every point returns to
    itself (epsilon = 0) within the lcm of the cycle lengths; and runs
    :func:`no_anticontraction_check`, which the theorem implies.
    """
    tol_ = space.default_tol(tol)
    scan = scan_expansive(space, budget, tol, workers=workers)
    tags: dict[str, int] = {}
    bad = None
    sums_ok = rec_ok = True
    base_sum = _pair_sum(space, tuple(range(space.n)))
    for t in scan.tables:
        cls = _tag(space, t, tol)
        tags[cls.tag.value] = tags.get(cls.tag.value, 0) + 1
        m = SelfMap(table=t)
        if bad is None and not (m.is_bijection() and cls.tag is Tag.ISOMETRY):
            bad = t
        if not cross_checks:
            continue
        s = _pair_sum(space, t)
        if not (s == base_sum if space.exact else abs(s - base_sum) <= tol_ * max(base_sum, 1)):
            sums_ok = False
        if m.is_bijection():
            period = math.lcm(*cycle_lengths(t))
            for x in range(space.n):
                if not recurrence_search(space, m, x, 0, period).found:
                    rec_ok = False
    no_anti = None
    if cross_checks:
        no_anti = no_anticontraction_check(space, tol, budget=budget).ok
    return EnumerationReport(space.n, scan.maps_covered, len(scan.tables), bad is None, bad,
                             scan.method, sums_ok, rec_ok, no_anti, tags)


# boundedness

@dataclass(frozen=True)
class NoAnticontractionReport:
    ok: bool
    subsets_checked: int
    offender: tuple[tuple[int, ...], tuple[int, ...], Any] | None = None

    def to_json_obj(self) -> dict:
        off = None
        if self.offender:
            sub, tab, e = self.offender
            off = {"subset": list(sub), "image": list(tab), "E": str(e)}
        return {"ok": self.ok, "subsets_checked": self.subsets_checked, "offender": off}


def no_anticontraction_check(space: FiniteMetricSpace, tol: float | None = None,
                             max_subset: int = 5, budget: int = DEFAULT_BUDGET
                             ) -> NoAnticontractionReport:
    """No self-map of any subset has minimum distance ratio above 1 + tol.

    Subsets of size 2..``max_subset`` are enumerated, plus the whole space
    when it is larger.
    """
    n = space.n
    sizes = list(range(2, min(n, max_subset) + 1))
    subsets = [c for k in sizes for c in itertools.combinations(range(n), k)]
    if n > max_subset:
        subsets.append(tuple(range(n)))
    for sub in subsets:
        sp = space.restrict(sub)
        for t in scan_expansive(sp, budget, tol).tables:
            cls = classify(sp, SelfMap(table=t), tol)
            if cls.tag is Tag.ANTICONTRACTION:
                return NoAnticontractionReport(False, len(subsets), (sub, t, cls.E))
    return NoAnticontractionReport(True, len(subsets))


# counterexample

@dataclass(frozen=True)
class CounterexampleReport:
    N: int
    formula_ok: bool
    all_above_one: bool
    diameter_two: bool
    only_identity: bool
    expansive_maps: tuple[tuple[int, ...], ...]
    method: str
    net_size: int

    @property
    def passed(self) -> bool:
        return (self.formula_ok and self.all_above_one and self.diameter_two
                and self.only_identity and self.net_size == self.N)

    def to_json_obj(self) -> dict:
        return {"N": self.N, "formula_ok": self.formula_ok, "all_above_one": self.all_above_one,
                "diameter_two": self.diameter_two, "only_identity": self.only_identity,
                "expansive_maps": [list(t) for t in self.expansive_maps],
                "method": self.method, "net_size_0.5": self.net_size, "passed": self.passed}


def verify_counterexample(N: int, budget: int = DEFAULT_BUDGET) -> CounterexampleReport:
    """Truncation {x_1..x_N}: d(x_m, x_n) = 1 + 1/min(m, n), every distance
    exceeds 1, the diameter is 2, and the identity is the only expansion."""
    if N < 2:
        raise DomainError("N must be at least 2")
    space = counterexample_space(N)
    formula = all(space.d(m - 1, n - 1) == 1 + Fraction(1, min(m, n))
                  for m, n in itertools.combinations(range(1, N + 1), 2))
    above = all(space.d(i, j) > 1 for i, j in itertools.combinations(range(N), 2))
    diam2 = diameter(space) == 2 and all(space.d(0, k) == 2 for k in range(1, N))
    scan = scan_expansive(space, budget, 0)
    only_id = scan.tables == (tuple(range(N)),)
    net = min_epsilon_net(space, Fraction(1, 2))
    return CounterexampleReport(N, formula, above, diam2, only_id, scan.tables, scan.method,
                                net.size)


# instance generators

def exhaustive_spaces(max_size: int, values=(1, 2, 3)) -> Iterator[FiniteMetricSpace]:
    """Every valid metric on 1..max_size points with distances drawn from ``values``."""
    for n in range(1, max_size + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for combo in itertools.product(values, repeat=len(pairs)):
            rows = [[0] * n for _ in range(n)]
            for (i, j), v in zip(pairs, combo):
                rows[i][j] = rows[j][i] = v
            sp = FiniteMetricSpace.build(rows, exact=True)
            if validate_metric(sp).ok:
                yield sp


def random_space(rng: np.random.Generator, n: int, high: int = 10) -> FiniteMetricSpace:
    """Uniform distances in {1..high}, repaired by shortest-path completion."""
    d = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    d[iu] = rng.integers(1, high + 1, size=len(iu[0]))
    d = d + d.T
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return FiniteMetricSpace.build(d.tolist(), exact=True)


def random_spaces(seed: int, count: int, sizes=(2, 3, 4)) -> Iterator[FiniteMetricSpace]:
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_space(rng, int(rng.choice(sizes)))
