"""Finite and lazily sampled metric spaces.

A :class:`FiniteMetricSpace` is an explicit distance matrix, either in float
mode or in exact mode where every entry is a :class:`fractions.Fraction`.
A :class:`MetricOracle` is a point generator plus a distance rule and stands
in for countable or unbounded spaces.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
EXACT_NET_CUTOFF = 20


class MetricStructureError(ValueError):
    """Distance matrix is not square or does not match the labels."""


class DomainError(ValueError):
    """Operation is undefined on the given input (empty space, singleton, ...)."""


class MapError(ValueError):
    """A self-map is not total on its domain or leaves the space."""


def _as_number(value: Any, exact: bool):
    if exact:
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def _is_exact_entry(value: Any) -> bool:
    return isinstance(value, (str, Rational)) and not isinstance(value, bool)


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Point labels plus a square distance matrix.

    Distances are ``Fraction`` in exact mode and ``float`` otherwise.  The
    metric axioms are *not* enforced here; see :func:`validate_metric`.
    """

    labels: tuple[str, ...]
    dist: tuple[tuple[Any, ...], ...]
    exact: bool = False

    def __post_init__(self):
        n = len(self.labels)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            shape = [len(row) for row in self.dist]
            raise MetricStructureError(
                f"distance matrix rows {shape} do not match {n} labels"
            )

    @classmethod
    def build(cls, dist: Sequence[Sequence[Any]], labels: Sequence[str] | None = None,
              exact: bool | None = None) -> "FiniteMetricSpace":
        rows = [list(r) for r in dist]
        if labels is None:
            labels = [str(i) for i in range(len(rows))]
        if exact is None:
            exact = all(_is_exact_entry(v) for r in rows for v in r)
        return cls(
            labels=tuple(str(x) for x in labels),
            dist=tuple(tuple(_as_number(v, exact) for v in r) for r in rows),
            exact=exact,
        )

    @classmethod
    def from_points(cls, points: Sequence[Any], metric: Callable[[Any, Any], Any],
                    labels: Sequence[str] | None = None,
                    exact: bool | None = None) -> "FiniteMetricSpace":
        n = len(points)
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = metric(points[i], points[j])
        if labels is None:
            labels = [str(p) for p in points]
        return cls.build(rows, labels, exact)

    @classmethod
    def from_json(cls, text: str, exact: bool | None = None) -> "FiniteMetricSpace":
        """Parse ``{"labels": [...], "dist": [[...]]}``.

        Entries may be JSON numbers or rational strings such as ``"3/4"``.
        Integer and string entries throughout select exact mode.
        """
        doc = json.loads(text)
        if not isinstance(doc, dict) or "dist" not in doc:
            raise MetricStructureError("space document needs a 'dist' matrix")
        dist = doc["dist"]
        if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
            raise MetricStructureError("'dist' must be a list of rows")
        return cls.build(dist, doc.get("labels"), exact)

    def to_json_obj(self) -> dict:
        def enc(v):
            if self.exact:
                return v.numerator if v.denominator == 1 else str(v)
            return v
        return {"labels": list(self.labels),
                "dist": [[enc(v) for v in row] for row in self.dist]}

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int):
        return self.dist[i][j]

    def restrict(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(indices)
        return FiniteMetricSpace(
            labels=tuple(self.labels[i] for i in idx),
            dist=tuple(tuple(self.dist[i][j] for j in idx) for i in idx),
            exact=self.exact,
        )

    def scaled(self, c) -> "FiniteMetricSpace":
        c = Fraction(c) if self.exact else float(c)
        return FiniteMetricSpace(
            self.labels, tuple(tuple(v * c for v in r) for r in self.dist), self.exact
        )

    @functools.cached_property
    def _array(self) -> np.ndarray:
        arr = np.array([[float(v) for v in r] for r in self.dist], dtype=float)
        arr.setflags(write=False)
        return arr

    def as_array(self) -> np.ndarray:
        return self._array

    def integer_matrix(self) -> np.ndarray:
        """Exact-mode distances rescaled to a common integer denominator."""
        if not self.exact:
            raise DomainError("integer_matrix requires an exact-mode space")
        den = 1
        for row in self.dist:
            for v in row:
                den = den * v.denominator // math.gcd(den, v.denominator)
        return np.array([[int(v * den) for v in r] for r in self.dist], dtype=np.int64)

    def default_tol(self, tol: float | None) -> float:
        if tol is not None:
            return tol
        return 0.0 if self.exact else DEFAULT_TOL


@dataclass(frozen=True)
class Violation:
    code: str
    witness: tuple[int, ...]
    detail: str = ""

    def to_json_obj(self) -> dict:
        return {"code": self.code, "witness": list(self.witness), "detail": self.detail}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def to_json_obj(self) -> dict:
        return {"valid": self.ok, "violations": [v.to_json_obj() for v in self.violations]}


def leq(a, b, tol: float) -> bool:
    """``a <= b`` up to a relative tolerance (exact when tol is 0)."""
    if tol == 0:
        return a <= b
    return float(a) <= float(b) + tol * max(abs(float(a)), abs(float(b)))


def validate_metric(space: FiniteMetricSpace, tol: float | None = None) -> ValidationReport:
    """Check the four metric axioms and report each violation with its witness.

    Codes: ``nonzero_diagonal`` (i,), ``asymmetric`` (i, j),
    ``nonpositive_distance`` (i, j), ``triangle`` (i, j, k) meaning
    d(i, k) > d(i, j) + d(j, k).
    """
    tol = space.default_tol(tol)
    n = space.n
    d = space.dist
    out: list[Violation] = []
    for i in range(n):
        if d[i][i] != 0 and not (tol and abs(float(d[i][i])) <= tol):
            out.append(Violation("nonzero_diagonal", (i,), f"d={d[i][i]}"))
    for i, j in itertools.combinations(range(n), 2):
        a, b = d[i][j], d[j][i]
        if not (leq(a, b, tol) and leq(b, a, tol)):
            out.append(Violation("asymmetric", (i, j), f"{a} != {b}"))
        if a <= 0 or b <= 0:
            out.append(Violation("nonpositive_distance", (i, j), f"d={min(a, b)}"))
    for i, k in itertools.combinations(range(n), 2):
        for j in range(n):
            if j == i or j == k:
                continue
            if not leq(d[i][k], d[i][j] + d[j][k], tol):
                out.append(Violation(
                    "triangle", (i, j, k),
                    f"d({i},{k})={d[i][k]} > {d[i][j]} + {d[j][k]}",
                ))
    return ValidationReport(tuple(out))


def diameter(space: FiniteMetricSpace):
    if space.n == 0:
        raise DomainError("diameter of an empty space is undefined")
    return max(max(row) for row in space.dist)


@dataclass(frozen=True)
class EpsilonNet:
    centers: tuple[int, ...]
    optimal: bool

    @property
    def size(self) -> int:
        return len(self.centers)


def _cover_masks(space: FiniteMetricSpace, epsilon) -> list[int]:
    masks = []
    for i in range(space.n):
        m = 0
        for j in range(space.n):
            if space.dist[i][j] <= epsilon:
                m |= 1 << j
        masks.append(m)
    return masks


def greedy_epsilon_net(space: FiniteMetricSpace, epsilon) -> tuple[int, ...]:
    masks = _cover_masks(space, epsilon)
    full = (1 << space.n) - 1
    covered = 0
    chosen = []
    while covered != full:
        best = max(range(space.n), key=lambda i: (bin(masks[i] & ~covered).count("1"), -i))
        chosen.append(best)
        covered |= masks[best]
    return tuple(sorted(chosen))


def _exact_net(masks: list[int], n: int, upper: tuple[int, ...]) -> tuple[int, ...]:
    full = (1 << n) - 1
    best = list(upper)
    # branch on the lowest uncovered point: one of its covering centers must be picked
    coverers = [[c for c in range(n) if masks[c] >> p & 1] for p in range(n)]

    def search(covered: int, chosen: list[int]):
        nonlocal best
        if covered == full:
            if len(chosen) < len(best):
                best = sorted(chosen)
            return
        if len(chosen) + 1 >= len(best):
            return
        p = (~covered & full & -(~covered & full)).bit_length() - 1
        for c in coverers[p]:
            chosen.append(c)
            search(covered | masks[c], chosen)
            chosen.pop()

    search(0, [])
    return tuple(best)


def min_epsilon_net(space: FiniteMetricSpace, epsilon, cutoff: int = EXACT_NET_CUTOFF) -> EpsilonNet:
    """Smallest set of centers whose closed epsilon-balls cover the space.

    Exact branch-and-bound up to ``cutoff`` points; greedy above that, in
    which case the result is an upper bound and ``optimal`` is False.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if space.n == 0:
        return EpsilonNet((), True)
    upper = greedy_epsilon_net(space, epsilon)
    if space.n > cutoff:
        return EpsilonNet(upper, False)
    return EpsilonNet(_exact_net(_cover_masks(space, epsilon), space.n, upper), True)


@dataclass(frozen=True)
class SelfMap:
    """A self-map given as an index table (finite) or as a rule (lazy)."""

    table: tuple[int, ...] | None = None
    rule: Callable[[Any], Any] | None = field(default=None, compare=False)

    def __post_init__(self):
        if (self.table is None) == (self.rule is None):
            raise MapError("a SelfMap needs exactly one of table or rule")

    @classmethod
    def from_table(cls, table: Iterable[int], size: int | None = None) -> "SelfMap":
        t = tuple(int(v) for v in table)
        size = len(t) if size is None else size
        if len(t) != size:
            raise MapError(f"map table has {len(t)} entries for {size} points")
        bad = [i for i, v in enumerate(t) if not 0 <= v < size]
        if bad:
            raise MapError(f"images of points {bad} leave the space")
        return cls(table=t)

    @classmethod
    def from_rule_on(cls, space_points: Sequence[Any], rule: Callable[[Any], Any]) -> "SelfMap":
        """Tabulate ``rule`` on explicit points; every image must be one of them."""
        index = {p: i for i, p in enumerate(space_points)}
        table = []
        for p in space_points:
            q = rule(p)
            if q not in index:
                raise MapError(f"rule sends {p!r} to {q!r}, outside the space")
            table.append(index[q])
        return cls(table=tuple(table))

    @classmethod
    def from_json(cls, text: str, size: int) -> "SelfMap":
        doc = json.loads(text)
        image = doc.get("image") if isinstance(doc, dict) else doc
        if not isinstance(image, list):
            raise MapError("map document needs an 'image' list")
        return cls.from_table(image, size)

    @classmethod
    def identity(cls, n: int) -> "SelfMap":
        return cls(table=tuple(range(n)))

    def __call__(self, x):
        if self.table is not None:
            return self.table[x]
        return self.rule(x)

    @property
    def finite(self) -> bool:
        return self.table is not None

    def is_bijection(self) -> bool:
        return self.table is not None and len(set(self.table)) == len(self.table)

    def to_json_obj(self) -> dict:
        return {"image": list(self.table) if self.table is not None else None}


def iterate(map: SelfMap, x, n: int):
    if n < 0:
        raise DomainError("iteration count must be nonnegative")
    for _ in range(n):
        x = map(x)
    return x


@dataclass(frozen=True)
class MetricOracle:
    """Lazily sampled metric space: ``point_at(k)`` enumerates points."""

    name: str
    point_at: Callable[[int], Any] = field(compare=False)
    distance: Callable[[Any, Any], Any] = field(compare=False)
    exact: bool = False

    def points(self, count: int) -> list:
        return [self.point_at(k) for k in range(count)]

    def sample(self, count: int) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_points(self.points(count), self.distance,
                                             exact=self.exact or None)

    def spot_check(self, count: int, triples: int = 200, rng: np.random.Generator | None = None,
                   tol: float = DEFAULT_TOL) -> ValidationReport:
        """Symmetry and zero self-distance on all sampled pairs, triangle
        inequality on ``triples`` random triples."""
        pts = self.points(count)
        out = []
        for i, p in enumerate(pts):
            if self.distance(p, p) != 0:
                out.append(Violation("nonzero_diagonal", (i,)))
        for i, j in itertools.combinations(range(count), 2):
            a, b = self.distance(pts[i], pts[j]), self.distance(pts[j], pts[i])
            if not (leq(a, b, tol) and leq(b, a, tol)):
                out.append(Violation("asymmetric", (i, j)))
        rng = rng or np.random.default_rng(0)
        if count >= 3:
            for _ in range(triples):
                i, j, k = (int(v) for v in rng.choice(count, size=3, replace=False))
                if not leq(self.distance(pts[i], pts[k]),
                           self.distance(pts[i], pts[j]) + self.distance(pts[j], pts[k]), tol):
                    out.append(Violation("triangle", (i, j, k)))
        return ValidationReport(tuple(out))
