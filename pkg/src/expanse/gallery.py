"""Closed-form example spaces and maps.

Finitely supported sequences under the sup metric, the family of scaled
indicator functions f_n = sqrt(n) * 1_[0, 1/n] in L2(0, inf) (handled only
through its closed-form distance), and the doubling map on the real line
under the standard and the bounded metric |x - y| / (|x - y| + 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .expansion_analysis import Tag, classify_sample
from .metric_core import DEFAULT_TOL, DomainError, FiniteMetricSpace, validate_metric


@dataclass(frozen=True)
class SeqPoint:
    """Finitely supported real sequence; trailing zeros are dropped."""

    coords: tuple[Any, ...] = ()

    def __post_init__(self):
        c = list(self.coords)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coords", tuple(c))

    def __getitem__(self, k: int):
        return self.coords[k] if k < len(self.coords) else 0

    def __len__(self):
        return len(self.coords)

    def __repr__(self):
        return f"SeqPoint{self.coords}"


def seq(*coords) -> SeqPoint:
    return SeqPoint(tuple(coords))


def sup_distance(x: SeqPoint, y: SeqPoint):
    n = max(len(x), len(y))
    return max((abs(x[k] - y[k]) for k in range(n)), default=0)


def right_shift(x: SeqPoint) -> SeqPoint:
    return SeqPoint((0,) + x.coords)


def interleave_square(x: SeqPoint) -> SeqPoint:
    out = []
    for v in x.coords:
        out += [v, v * v]
    return SeqPoint(tuple(out))


def counterexample_point(n: int) -> SeqPoint:
    """The sequence with 1 + 1/n in coordinate n (1-based), zero elsewhere."""
    if n < 1:
        raise DomainError("index starts at 1")
    return SeqPoint((0,) * (n - 1) + (1 + Fraction(1, n),))


def counterexample_space(N: int) -> FiniteMetricSpace:
    pts = [counterexample_point(n) for n in range(1, N + 1)]
    return FiniteMetricSpace.from_points(pts, sup_distance,
                                         labels=[f"x{n}" for n in range(1, N + 1)], exact=True)


def chi_distance(m: int, n: int) -> float:
    """L2 distance between f_m and f_n: sqrt(2 - 2 sqrt(min/max))."""
    if m < 1 or n < 1:
        raise DomainError("indices start at 1")
    if m == n:
        return 0.0
    lo, hi = min(m, n), max(m, n)
    return math.sqrt(2 - 2 * math.sqrt(lo / hi))


def chi_scale_map(k: int) -> Callable[[int], int]:
    if k < 1:
        raise DomainError("scale factor must be a positive integer")
    return lambda n: k * n


def chi_square_map(n: int) -> int:
    return n * n


def chi_square_ratio(n):
    """Growth ratio of the squaring map on the pair (f_{n^2}, f_n).

    Equals sqrt((1 - 1/n) / (1 - 1/sqrt(n))); evaluated through log1p so that
    consecutive values stay distinguishable for n up to 1e6 and beyond.
    Accepts scalars or numpy arrays, n >= 2.
    """
    n = np.asarray(n, dtype=float)
    return np.exp(0.5 * (np.log1p(-1 / n) - np.log1p(-1 / np.sqrt(n))))


def bounded_metric(x: float, y: float) -> float:
    d = abs(x - y)
    return d / (d + 1)


def doubling(x):
    return 2 * x


def doubling_bounded_ratio(x):
    """rho(2x, 0) / rho(x, 0) = 2(|x| + 1) / (2|x| + 1) for x != 0."""
    x = np.abs(np.asarray(x, dtype=float))
    return 2 * (x + 1) / (2 * x + 1)


@dataclass(frozen=True)
class LimitCheck:
    """Monotone-decrease check of a ratio sequence whose infimum is 1."""

    all_above_one: bool
    strictly_decreasing: bool
    last_value: float
    fitted_c: float | None = None

    @property
    def passed(self) -> bool:
        return self.all_above_one and self.strictly_decreasing

    def to_json_obj(self) -> dict:
        return {"all_above_one": self.all_above_one,
                "strictly_decreasing": self.strictly_decreasing,
                "last_value": self.last_value, "fitted_c": self.fitted_c,
                "passed": self.passed}


def chi_square_limit_check(max_n: int) -> LimitCheck:
    """Ratios at (n^2, n) for n = 2..max_n: above 1, strictly decreasing, and
    |ratio - 1| <= C / sqrt(n) with C fitted as the largest observed value."""
    if max_n < 3:
        raise DomainError("need max_n >= 3")
    n = np.arange(2, max_n + 1, dtype=float)
    r = chi_square_ratio(n)
    c = float(np.max((r - 1) * np.sqrt(n)))
    return LimitCheck(bool(np.all(r > 1)), bool(np.all(np.diff(r) < 0)), float(r[-1]), c)


def doubling_bounded_limit_check(xs) -> LimitCheck:
    r = doubling_bounded_ratio(np.sort(np.asarray(xs, dtype=float)))
    return LimitCheck(bool(np.all(r > 1)), bool(np.all(np.diff(r) < 0)), float(r[-1]))


# Gallery entries: each returns a JSON-ready dict with a boolean "passed".

def _verdict(cls, expected: Tag) -> dict:
    out = cls.to_json_obj()
    out["expected"] = expected.value
    out["passed"] = cls.tag is expected
    return out


def run_rotation(samples: int = 20, tol: float = DEFAULT_TOL, **_) -> dict:
    rng = np.random.default_rng(0)
    pts = [complex(a, b) for a, b in rng.normal(size=(samples, 2))]
    cls = classify_sample(pts, lambda z, w: abs(z - w), lambda z: cmath.exp(1j) * z, tol)
    return {"fact": "rotation by one radian on C is an isometry, not a proper expansion",
            **_verdict(cls, Tag.ISOMETRY)}


def run_right_shift(samples: int = 12, tol: float = DEFAULT_TOL, **_) -> dict:
    rng = np.random.default_rng(1)
    pts = [SeqPoint(tuple(Fraction(int(v), 8) for v in row))
           for row in rng.integers(-16, 17, size=(samples, 5))]
    cls = classify_sample(pts, sup_distance, right_shift, 0)
    return {"fact": "right shift on l_inf is an isometry", **_verdict(cls, Tag.ISOMETRY)}


def run_interleave_square(tol: float = DEFAULT_TOL, **_) -> dict:
    pts = [seq(1), seq(Fraction(1, 2)), seq()]
    cls = classify_sample(pts, sup_distance, interleave_square, 0)
    return {"fact": "interleave-square map on l_inf is a proper expansion that is not strict",
            **_verdict(cls, Tag.PROPER_NOT_STRICT)}


def run_chi_scale(k: int = 3, max_n: int = 50, tol: float = DEFAULT_TOL, **_) -> dict:
    idx = list(range(1, max_n + 1))
    cls = classify_sample(idx, chi_distance, chi_scale_map(k), tol)
    space = FiniteMetricSpace.from_points(idx, chi_distance)
    return {"fact": "f_n -> f_kn is an isometry of the indicator family",
            "metric_valid": validate_metric(space).ok,
            **_verdict(cls, Tag.ISOMETRY)}


def _strict_growth(cls) -> bool:
    return cls.tag in (Tag.STRICT_NOT_ANTICONTRACTION, Tag.ANTICONTRACTION)


def run_chi_square(max_n: int = 1000, tol: float = DEFAULT_TOL, **_) -> dict:
    idx = list(range(1, 31))
    cls = classify_sample(idx, chi_distance, chi_square_map, tol)
    lim = chi_square_limit_check(max_n)
    return {"fact": "f_n -> f_{n^2} is a strict expansion but not an anticontraction: "
                    "growth ratios at (n^2, n) decrease to 1",
            "verdict": Tag.STRICT_NOT_ANTICONTRACTION.value,
            "sample": cls.to_json_obj(), "sample_strict_growth": _strict_growth(cls),
            "limit": lim.to_json_obj(),
            "passed": _strict_growth(cls) and lim.passed}


def run_doubling(max_x: float = 1e6, tol: float = DEFAULT_TOL, **_) -> dict:
    pts = list(range(-5, 6))
    std = classify_sample(pts, lambda x, y: abs(x - y), doubling, tol)
    bnd = classify_sample(pts, bounded_metric, doubling, tol)
    lim = doubling_bounded_limit_check(np.geomspace(1, max_x, 200))
    ok = (std.tag is Tag.ANTICONTRACTION and std.E == 2
          and _strict_growth(bnd) and lim.passed)
    return {"fact": "x -> 2x is an anticontraction (E = 2) under |x - y| but only a strict "
                    "expansion under the bounded metric",
            "standard": std.to_json_obj(), "bounded_sample": bnd.to_json_obj(),
            "bounded_verdict": Tag.STRICT_NOT_ANTICONTRACTION.value,
            "bounded_limit": lim.to_json_obj(), "passed": ok}


GALLERY: dict[str, tuple[str, Callable[..., dict]]] = {
    "rotation": ("rotation by one radian in the complex plane", run_rotation),
    "right-shift": ("right shift on finitely supported sequences", run_right_shift),
    "interleave-square": ("(x1, x1^2, x2, x2^2, ...) on the witness triple", run_interleave_square),
    "chi-scale": ("f_n -> f_kn on the indicator family", run_chi_scale),
    "chi-square": ("f_n -> f_{n^2} on the indicator family", run_chi_square),
    "doubling": ("x -> 2x under the standard and bounded metrics", run_doubling),
}


def run_entry(name: str, **params) -> dict:
    if name not in GALLERY:
        raise KeyError(name)
    desc, fn = GALLERY[name]
    return {"entry": name, "description": desc, **fn(**params)}
