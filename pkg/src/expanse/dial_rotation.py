"""The dial set {e^{in} : n >= 0} on the unit circle and its rotation.

Angles are reduced modulo 2*pi against an 80-digit decimal value of 2*pi, so
chord lengths stay meaningful for indices far beyond float precision of
``n`` itself.  Approach sequences come from continued-fraction convergents
of 2*pi; a plain scan is kept as a cross-check in the tests.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass, field
from decimal import Context, Decimal
from fractions import Fraction
from typing import Sequence

import numpy as np

from .metric_core import DomainError, FiniteMetricSpace, SelfMap

TWO_PI_DIGITS = "6.283185307179586476925286766559005768394338798750211641949889184615632812572418"
TWO_PI = Decimal(TWO_PI_DIGITS)
_CTX = Context(prec=100)
MAX_CF_DEPTH = 40
UNIT_CIRCLE_TOL = 1e-12


def signed_angle(n: int) -> float:
    """n modulo 2*pi, as a float in (-pi, pi]."""
    n = int(n)
    k = _CTX.to_integral_value(_CTX.divide(Decimal(n), TWO_PI))
    r = _CTX.subtract(Decimal(n), _CTX.multiply(k, TWO_PI))
    a = float(r)
    return a + 2 * math.pi if a <= -math.pi else a


def angle(n: int) -> float:
    """n modulo 2*pi in [0, 2*pi)."""
    a = signed_angle(n)
    return a if a >= 0 else a + 2 * math.pi


def chord_of_offset(k: int) -> float:
    """|e^{ik} - 1|, the distance between dial points whose indices differ by k."""
    return 2 * abs(math.sin(signed_angle(k) / 2))


@dataclass(frozen=True)
class DialPoint:
    n: int
    x: float = field(compare=False)
    y: float = field(compare=False)

    @property
    def coords(self) -> tuple[float, float]:
        return (self.x, self.y)


def dial_point(n: int) -> DialPoint:
    if n < 0:
        raise DomainError("dial indices are nonnegative")
    a = signed_angle(n)
    return DialPoint(n, math.cos(a), math.sin(a))


def chord(p: DialPoint, q: DialPoint) -> float:
    return chord_of_offset(p.n - q.n)


def rotate(p: DialPoint) -> DialPoint:
    """Counterclockwise rotation by one radian: e^{in} -> e^{i(n+1)}."""
    return dial_point(p.n + 1)


def rotation_map() -> SelfMap:
    """The rotation as an index rule n -> n + 1."""
    return SelfMap(rule=lambda n: n + 1)


def dial_space(count: int) -> FiniteMetricSpace:
    """The first ``count`` dial points with their chord distances."""
    offsets = np.array([chord_of_offset(k) for k in range(count)])
    idx = np.arange(count)
    mat = offsets[np.abs(idx[:, None] - idx[None, :])]
    return FiniteMetricSpace(tuple(f"e^{{i{n}}}" for n in range(count)),
                             tuple(tuple(row) for row in mat.tolist()))


def return_margin(count: int) -> tuple[int, float]:
    """min over 1 <= n <= count of |e^{in} - 1|, with its argmin.

    A positive value is the distance from e^{i0} to the rotated image of
    the first ``count`` points; e^{i0} itself is never an image.
    """
    if count < 1:
        raise DomainError("count must be positive")
    best = min(range(1, count + 1), key=lambda n: (chord_of_offset(n), n))
    return best, chord_of_offset(best)


# continued fractions

@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    error: float  # |x*q - p|

    def to_json_obj(self) -> dict:
        return {"p": self.p, "q": self.q, "error": self.error}


@dataclass(frozen=True)
class ContinuedFraction:
    coefficients: tuple[int, ...]
    convergents: tuple[Convergent, ...]
    terminated: bool  # the value is exactly this finite fraction
    truncated: bool   # precision or depth budget ran out before the requested depth


def _bounds(x) -> tuple[Fraction, Fraction, Fraction]:
    if isinstance(x, (int, Fraction)):
        v = Fraction(x)
        return v, v, v
    if isinstance(x, Decimal):
        v = Fraction(x)
        half = Fraction(1, 2) * Fraction(10) ** x.as_tuple().exponent
        return v, v - half, v + half
    if isinstance(x, float):
        v = Fraction(x)
        half = Fraction(math.ulp(x)) / 2
        return v, v - half, v + half
    raise TypeError(f"unsupported number type {type(x).__name__}")


def continued_fraction(x, depth: int = 20) -> ContinuedFraction:
    """Continued-fraction coefficients and convergents of ``x > 0``.

    Floats and Decimals are treated as known only to half a unit in their
    last place; a coefficient is emitted only when every value in that
    interval agrees on it.  ``int`` and ``Fraction`` inputs are exact.
    """
    center, lo, hi = _bounds(x)
    if center <= 0:
        raise DomainError("x must be positive")
    if depth < 1:
        raise DomainError("depth must be positive")
    truncated = depth > MAX_CF_DEPTH
    if truncated:
        warnings.warn(f"depth {depth} exceeds the precision budget; using {MAX_CF_DEPTH}")
        depth = MAX_CF_DEPTH

    coeffs: list[int] = []
    terminated = False
    while len(coeffs) < depth:
        a, b = math.floor(lo), math.floor(hi)
        if a != b or (lo != hi and lo == a):
            # interval straddles an integer: only an exact termination is decidable
            if center.denominator == 1 and lo <= center <= hi:
                coeffs.append(int(center))
                terminated = True
            else:
                truncated = True
            break
        coeffs.append(a)
        if lo == hi == a:
            terminated = True
            break
        center, lo, hi = 1 / (center - a), 1 / (hi - a), 1 / (lo - a)

    value, _, _ = _bounds(x)
    convs = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    for a in coeffs:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        convs.append(Convergent(p1, q1, float(abs(value * q1 - p1))))
    return ContinuedFraction(tuple(coeffs), tuple(convs), terminated, truncated)


@dataclass(frozen=True)
class ApproachSequence:
    target: int
    indices: tuple[int, ...]
    errors: tuple[float, ...]
    convergents: tuple[Convergent, ...]
    truncated: bool

    def to_json_obj(self) -> dict:
        return {"target": self.target, "indices": list(self.indices),
                "errors": list(self.errors),
                "convergents": [c.to_json_obj() for c in self.convergents],
                "truncated": self.truncated}


def approach_sequence(target_n: int, count: int, radius: float = 0.1) -> ApproachSequence:
    """Indices n(k) = target + p_k with e^{i n(k)} -> e^{i target}.

    p_k/q_k run over the convergents of 2*pi, starting with the first whose
    chord error falls below ``radius``.  The list is shorter than ``count``
    (and flagged) when the precision budget runs out.
    """
    if target_n < 0:
        raise DomainError("target index must be nonnegative")
    if count < 1:
        raise DomainError("count must be positive")
    cf = continued_fraction(TWO_PI, MAX_CF_DEPTH)
    idx, errs, used = [], [], []
    for c in cf.convergents:
        if len(idx) == count:
            break
        if c.p <= 0:
            continue
        err = chord_of_offset(c.p)
        if err >= radius or (errs and err >= errs[-1]):
            continue
        idx.append(target_n + c.p)
        errs.append(err)
        used.append(c)
    short = len(idx) < count
    if short:
        warnings.warn(f"only {len(idx)} of {count} approach terms within the precision budget")
    return ApproachSequence(target_n, tuple(idx), tuple(errs), tuple(used), short)


def approach_rows(seq: ApproachSequence) -> list[tuple[int, float, float, float]]:
    """(n, cos n, sin n, error) rows for CSV export."""
    return [(n, dial_point(n).x, dial_point(n).y, e) for n, e in zip(seq.indices, seq.errors)]


# limit points

@dataclass(frozen=True)
class LimitPointReport:
    theta: float
    witnesses: tuple[int, ...]
    found: bool
    off_lattice: bool     # theta is farther than epsilon/2 from every n <= N (mod 2*pi)
    lattice_gap: float    # that smallest angular distance

    def to_json_obj(self) -> dict:
        return {"theta": self.theta, "witnesses": list(self.witnesses), "found": self.found,
                "off_lattice": self.off_lattice, "lattice_gap": self.lattice_gap}


def _circular_mean(angles: Sequence[float]) -> float:
    s = sum(math.sin(a) for a in angles)
    c = sum(math.cos(a) for a in angles)
    if math.hypot(s, c) < 1e-12:
        return 0.0
    return math.atan2(s, c) % (2 * math.pi)


def _angular_gap(theta: float, sorted_angles: list[float]) -> float:
    k = bisect.bisect_left(sorted_angles, theta)
    near = [sorted_angles[k % len(sorted_angles)], sorted_angles[k - 1]]
    return min(min(abs(theta - a), 2 * math.pi - abs(theta - a)) for a in near)


def find_limit_point(epsilon: float, N: int, min_cluster: int = 3) -> LimitPointReport:
    """A point e^{i theta} with at least ``min_cluster`` dial points n <= N within
    ``epsilon`` of it; theta is the circular mean of the witnesses.

    Windows are arcs whose points are all within chord ``epsilon`` of any
    point of the arc.  A window whose mean stays more than ``epsilon/2``
    (angularly) from every dial point is preferred when the scan has one;
    otherwise the densest window wins, lowest start index on ties.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    ang = [angle(n) for n in range(N + 1)]
    order = sorted(range(N + 1), key=lambda n: (ang[n], n))
    srt = [ang[n] for n in order]
    if epsilon >= 2:
        theta = _circular_mean(srt)
        gap = _angular_gap(theta, srt)
        return LimitPointReport(theta, tuple(range(N + 1)), N + 1 >= min_cluster,
                                gap > epsilon / 2, gap)

    width = 2 * math.asin(epsilon / 2)
    m = len(srt)
    best = None
    end = 0
    for i in range(m):
        end = max(end, i)
        while end + 1 < i + m and (srt[(end + 1) % m] - srt[i]) % (2 * math.pi) <= width:
            end += 1
        members = [order[k % m] for k in range(i, end + 1)]
        theta = _circular_mean([ang[n] for n in members])
        gap = _angular_gap(theta, srt)
        off = gap > epsilon / 2 and len(members) >= min_cluster
        key = (off, gap if off else 0.0, len(members))
        if best is None or key > best[0]:
            best = (key, theta, members, gap, off)
    _, theta, members, gap, off = best
    wit = tuple(sorted(n for n in members
                       if 2 * abs(math.sin((ang[n] - theta) / 2)) <= epsilon))
    return LimitPointReport(theta, wit, len(wit) >= min_cluster, off, gap)
