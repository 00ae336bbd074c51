"""Greedy construction of sparse point sets in unbounded spaces.

Each accepted point is farther from all earlier points than ``multiplier``
times their diameter.  On such a set the index shift x_k -> x_{k+1} grows
every distance by more than ``multiplier``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from .metric_core import DEFAULT_TOL, DomainError, MetricOracle, SelfMap


class CertificateError(AssertionError):
    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


# built-in oracles

def _abs_diff(x, y):
    return abs(x - y)


def _sup_dist(p, q):
    return max(abs(a - b) for a, b in zip(p, q))


@functools.lru_cache(maxsize=64)
def _shell(r: int, dim: int) -> tuple[tuple[int, ...], ...]:
    return tuple(v for v in itertools.product(range(-r, r + 1), repeat=dim)
                 if max(map(abs, v), default=0) == r)


def _lattice_point(k: int, dim: int = 2, scale: int = 1) -> tuple[int, ...]:
    """k-th point of Z^dim enumerated shell by shell in sup norm."""
    r = 0
    while (2 * r + 1) ** dim <= k:
        r += 1
    inner = (2 * r - 1) ** dim if r else 0
    return tuple(scale * c for c in _shell(r, dim)[k - inner])


def _van_der_corput(k: int) -> Fraction:
    q, denom, out = k, 1, Fraction(0)
    while q:
        denom *= 2
        q, bit = divmod(q, 2)
        out += Fraction(bit, denom)
    return out


def integer_line() -> MetricOracle:
    return MetricOracle("integers", lambda k: k, _abs_diff, exact=True)


def geometric(base: int = 3) -> MetricOracle:
    return MetricOracle(f"geometric-{base}", lambda k: base ** k, _abs_diff, exact=True)


def lattice(dim: int = 2, scale: int = 1) -> MetricOracle:
    return MetricOracle(f"lattice-{dim}d-x{scale}",
                        lambda k: _lattice_point(k, dim, scale), _sup_dist, exact=True)


def unit_interval() -> MetricOracle:
    """Points of [0, 1] in van der Corput order (dense, bounded)."""
    return MetricOracle("interval", _van_der_corput, _abs_diff, exact=True)


def bounded_line() -> MetricOracle:
    """The integers under |x - y| / (|x - y| + 1): unbounded as a set, bounded metric."""
    return MetricOracle("bounded-line", lambda k: k,
                        lambda x, y: Fraction(abs(x - y), abs(x - y) + 1), exact=True)


def circle() -> MetricOracle:
    """Dial points e^{ik} on the unit circle under the chord metric."""
    return MetricOracle("circle", lambda k: complex(math.cos(k), math.sin(k)),
                        lambda z, w: abs(z - w))


ORACLES: dict[str, Callable[..., MetricOracle]] = {
    "integers": integer_line,
    "geometric": geometric,
    "lattice": lattice,
    "interval": unit_interval,
    "bounded-line": bounded_line,
    "circle": circle,
}
UNBOUNDED = ("integers", "geometric", "lattice")
BOUNDED = ("interval", "bounded-line", "circle")


@dataclass(frozen=True)
class SparseSet:
    """Accepted points plus, for each k >= 2, the separation of the
    (k+1)-th point from the first k and the diameter of the first k."""

    points: tuple[Any, ...]
    scan_indices: tuple[int, ...]
    separations: tuple[Any, ...]
    diameters: tuple[Any, ...]
    complete: bool
    scanned: int
    distance: Callable[[Any, Any], Any]
    multiplier: Any = 2

    def __len__(self):
        return len(self.points)

    def d(self, a: int, b: int):
        return self.distance(self.points[a], self.points[b])

    def to_json_obj(self) -> dict:
        enc = _enc
        return {"points": [enc(p) for p in self.points], "scan_indices": list(self.scan_indices),
                "separations": [enc(v) for v in self.separations],
                "diameters": [enc(v) for v in self.diameters],
                "complete": self.complete, "scanned": self.scanned,
                "multiplier": enc(self.multiplier)}


def _enc(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, tuple):
        return [_enc(c) for c in v]
    return v


def _exceeds(a, b, exact: bool, tol: float) -> bool:
    if exact:
        return a > b
    return float(a) > float(b) * (1 + tol)


def greedy_sparse(oracle: MetricOracle, count: int, scan_budget: int = 100_000,
                  multiplier=2, tol: float = DEFAULT_TOL) -> SparseSet:
    """Scan ``oracle.point_at(0), point_at(1), ...`` and accept the first
    point whose distance to every accepted point exceeds ``multiplier``
    times the current diameter.

    Stops with ``complete=False`` if ``scan_budget`` points are scanned
    first, which is evidence (not proof) that the oracle is bounded.
    """
    if count < 2:
        raise DomainError("count must be at least 2")
    dist = oracle.distance
    pts, idx, seps, diams = [], [], [], []
    diam = 0
    k = 0
    while len(pts) < count and k < scan_budget:
        p = oracle.point_at(k)
        if not pts:
            pts.append(p)
            idx.append(k)
        else:
            gaps = [dist(p, x) for x in pts]
            sep = min(gaps)
            if len(pts) == 1:
                ok = sep > 0
            else:
                ok = _exceeds(sep, multiplier * diam, oracle.exact, tol)
            if ok:
                if len(pts) >= 2:
                    seps.append(sep)
                    diams.append(diam)
                diam = max(diam, max(gaps))
                pts.append(p)
                idx.append(k)
        k += 1
    return SparseSet(tuple(pts), tuple(idx), tuple(seps), tuple(diams),
                     len(pts) == count, k, dist, multiplier)


def shift_map(s: SparseSet) -> SelfMap:
    """x_k -> x_{k+1} on the set's indices, with the last point fixed."""
    n = len(s)
    if n < 3:
        raise DomainError("shift map needs at least 3 points")
    return SelfMap(table=tuple(range(1, n)) + (n - 1,))


@dataclass(frozen=True)
class AnticontractionCertificate:
    E_achieved: Any
    worst_pair: tuple[int, int]
    pairs_checked: int

    def to_json_obj(self) -> dict:
        return {"E_achieved": _enc(self.E_achieved), "worst_pair": list(self.worst_pair),
                "pairs_checked": self.pairs_checked}


def _ratio(num, den):
    if isinstance(num, (int, Fraction)) and isinstance(den, (int, Fraction)):
        return Fraction(num, 1) / den
    return num / den


def certify_anticontraction(s: SparseSet, exact: bool | None = None,
                            tol: float = DEFAULT_TOL) -> AnticontractionCertificate:
    """Minimum growth ratio of the shift over interior pairs (a < b <= n-2).

    The last point is excluded because the finite shift fixes it.  Raises
    :class:`CertificateError` naming the pair if any ratio fails to exceed
    the multiplier, or if a separation certificate does not hold.
    """
    n = len(s)
    if n < 3:
        raise DomainError("certification needs at least 3 points")
    for k, (sep, diam) in enumerate(zip(s.separations, s.diameters), start=2):
        if not _exceeds(sep, s.multiplier * diam, _is_exact(sep), tol):
            raise CertificateError(f"separation certificate fails at point {k}", (k, k))
    worst, worst_pair, checked = None, (0, 1), 0
    for a, b in itertools.combinations(range(n - 1), 2):
        r = _ratio(s.d(a + 1, b + 1), s.d(a, b))
        checked += 1
        if worst is None or r < worst:
            worst, worst_pair = r, (a, b)
    if not _exceeds(worst, s.multiplier, _is_exact(worst) if exact is None else exact, tol):
        raise CertificateError(f"pair {worst_pair} grows only by {worst}", worst_pair)
    return AnticontractionCertificate(worst, worst_pair, checked)


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def iterate_divergence_ok(s: SparseSet) -> bool:
    """d(T^k x_1, T^k x_2) >= multiplier^k * d(x_1, x_2) for k <= n - 2."""
    base = s.d(0, 1)
    for k in range(len(s) - 1):
        if s.d(k, k + 1) < s.multiplier ** k * base:
            return False
    return True
