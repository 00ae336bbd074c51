"""Classification of self-maps into the expansion hierarchy.

Every routine works from the distance ratios d(Tx, Ty) / d(x, y) over
unordered pairs of distinct points.  Tolerances are multiplicative on the
ratio, so results are invariant under rescaling the metric.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .metric_core import DEFAULT_TOL, DomainError, FiniteMetricSpace, MapError, SelfMap


class Tag(str, enum.Enum):
    NOT_EXPANSIVE = "NotExpansive"
    ISOMETRY = "Isometry"
    PROPER_NOT_STRICT = "ProperNotStrict"
    STRICT_NOT_ANTICONTRACTION = "StrictNotAnticontraction"
    ANTICONTRACTION = "Anticontraction"


@dataclass(frozen=True)
class PairWitness:
    pair: tuple[int, int]
    domain_distance: Any
    image_distance: Any

    @property
    def ratio(self):
        return _ratio(self.image_distance, self.domain_distance)

    def to_json_obj(self) -> dict:
        return {"pair": list(self.pair), "d": _num(self.domain_distance),
                "d_image": _num(self.image_distance)}


@dataclass(frozen=True)
class RatioProfile:
    min_ratio: Any
    max_ratio: Any
    argmin: tuple[int, int]
    argmax: tuple[int, int]

    def to_json_obj(self) -> dict:
        return {"min_ratio": _num(self.min_ratio), "max_ratio": _num(self.max_ratio),
                "argmin": list(self.argmin), "argmax": list(self.argmax)}


@dataclass(frozen=True)
class ExpansionClass:
    """Classification label plus witnesses.

    ``scope`` is ``"exhaustive"`` when every pair of the space was scanned,
    ``"sampled"`` when only a finite restriction of a larger space was.
    """

    tag: Tag
    witnesses: tuple[PairWitness, ...] = ()
    E: Any = None
    scope: str = "exhaustive"

    @property
    def expansive(self) -> bool:
        return self.tag is not Tag.NOT_EXPANSIVE

    def to_json_obj(self) -> dict:
        return {"class": self.tag.value, "E": _num(self.E) if self.E is not None else None,
                "witnesses": [w.to_json_obj() for w in self.witnesses], "scope": self.scope}


def _num(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else str(v)
    if isinstance(v, float) and v == float("inf"):
        return "inf"
    return v


def _ratio(num, den):
    if den == 0:
        return float("inf") if num else 1
    if isinstance(num, Fraction) or isinstance(den, Fraction):
        if isinstance(num, float) or isinstance(den, float):
            return float(num) / float(den)
        return Fraction(num) / Fraction(den)
    return num / den


def pair_records(n: int, domain_distance: Callable[[int, int], Any],
                 image_distance: Callable[[int, int], Any]) -> list[PairWitness]:
    """All unordered distinct pairs (i < j) in lexicographic order."""
    out = []
    for i, j in itertools.combinations(range(n), 2):
        d = domain_distance(i, j)
        if d == 0:
            continue
        out.append(PairWitness((i, j), d, image_distance(i, j)))
    return out


def profile_records(records: Sequence[PairWitness]) -> RatioProfile:
    if not records:
        raise DomainError("ratio profile needs at least one pair of distinct points")
    lo = hi = records[0]
    lo_r = hi_r = lo.ratio
    for w in records[1:]:
        r = w.ratio
        # strict comparisons keep the lowest pair index on ties
        if r < lo_r:
            lo, lo_r = w, r
        if r > hi_r:
            hi, hi_r = w, r
    return RatioProfile(lo_r, hi_r, lo.pair, hi.pair)


def classify_records(records: Sequence[PairWitness], tol: float = DEFAULT_TOL,
                     scope: str = "exhaustive") -> ExpansionClass:
    prof = profile_records(records)
    by_pair = {w.pair: w for w in records}
    if prof.min_ratio < 1 - tol:
        return ExpansionClass(Tag.NOT_EXPANSIVE, (by_pair[prof.argmin],), scope=scope)
    if prof.min_ratio > 1:
        if prof.min_ratio > 1 + tol:
            return ExpansionClass(Tag.ANTICONTRACTION, (by_pair[prof.argmin],),
                                  E=prof.min_ratio, scope=scope)
        return ExpansionClass(Tag.STRICT_NOT_ANTICONTRACTION, (by_pair[prof.argmin],),
                              scope=scope)
    if prof.max_ratio > 1 + tol:
        equal = next(w for w in records if abs(w.ratio - 1) <= tol)
        return ExpansionClass(Tag.PROPER_NOT_STRICT, (by_pair[prof.argmax], equal), scope=scope)
    return ExpansionClass(Tag.ISOMETRY, scope=scope)


def _space_records(space: FiniteMetricSpace, map: SelfMap,
                   domain: Sequence[int] | None = None) -> list[PairWitness]:
    if space.n < 2:
        raise DomainError("need at least two points")
    dom = list(range(space.n)) if domain is None else list(domain)
    img = [map(i) for i in dom]
    for i, t in zip(dom, img):
        if not 0 <= t < space.n:
            raise MapError(f"point {i} maps to {t}, outside the space")
    recs = pair_records(len(dom), lambda a, b: space.dist[dom[a]][dom[b]],
                        lambda a, b: space.dist[img[a]][img[b]])
    if domain is None:
        return recs
    return [PairWitness((dom[w.pair[0]], dom[w.pair[1]]), w.domain_distance, w.image_distance)
            for w in recs]


def ratio_profile(space: FiniteMetricSpace, map: SelfMap,
                  domain: Sequence[int] | None = None) -> RatioProfile:
    return profile_records(_space_records(space, map, domain))


def classify(space: FiniteMetricSpace, map: SelfMap, tol: float | None = None,
             domain: Sequence[int] | None = None) -> ExpansionClass:
    """Classify ``map`` on ``space`` (or on the sub-domain ``domain``).

    ``tol`` defaults to 0 for exact-mode spaces and ``DEFAULT_TOL`` otherwise.
    A finite space never yields StrictNotAnticontraction unless the minimum
    ratio lies in (1, 1 + tol].
    """
    tol = space.default_tol(tol)
    scope = "exhaustive" if domain is None else "sampled"
    return classify_records(_space_records(space, map, domain), tol, scope)


def _sample_records(points: Sequence[Any], distance: Callable[[Any, Any], Any],
                    f: Callable[[Any], Any]) -> list[PairWitness]:
    if len(points) < 2:
        raise DomainError("need at least two points")
    images = [f(p) for p in points]
    return pair_records(len(points), lambda a, b: distance(points[a], points[b]),
                        lambda a, b: distance(images[a], images[b]))


def ratio_profile_sample(points: Sequence[Any], distance: Callable[[Any, Any], Any],
                         f: Callable[[Any], Any]) -> RatioProfile:
    return profile_records(_sample_records(points, distance, f))


def classify_sample(points: Sequence[Any], distance: Callable[[Any, Any], Any],
                    f: Callable[[Any], Any], tol: float = DEFAULT_TOL) -> ExpansionClass:
    """Classify a rule ``f`` over a finite sample of a larger space.

    Images need not lie in the sample.  The verdict only certifies the
    sampled restriction and is labelled ``scope="sampled"``.
    """
    return classify_records(_sample_records(points, distance, f), tol, "sampled")


@dataclass(frozen=True)
class SurjectivityReport:
    surjective: bool
    missing: tuple[int, ...]

    def to_json_obj(self) -> dict:
        return {"surjective": self.surjective, "missing": list(self.missing)}


def _images(space: FiniteMetricSpace, map: SelfMap, domain: Iterable[int] | None) -> list[int]:
    dom = range(space.n) if domain is None else domain
    out = []
    for i in dom:
        t = map(i)
        if not 0 <= t < space.n:
            raise MapError(f"point {i} maps to {t}, outside the space")
        out.append(t)
    return out


def is_surjective(space: FiniteMetricSpace, map: SelfMap,
                  domain: Iterable[int] | None = None) -> SurjectivityReport:
    """Whether the image of ``domain`` (default: every point) covers the space."""
    hit = set(_images(space, map, domain))
    missing = tuple(i for i in range(space.n) if i not in hit)
    return SurjectivityReport(not missing, missing)


@dataclass(frozen=True)
class DensityReport:
    dense: bool
    worst_point: int | None
    worst_distance: Any

    def to_json_obj(self) -> dict:
        return {"dense": self.dense, "worst_point": self.worst_point,
                "worst_distance": _num(self.worst_distance)}


def range_density(sample: FiniteMetricSpace, map: SelfMap, epsilon,
                  domain: Iterable[int] | None = None) -> DensityReport:
    """Is every sample point within ``epsilon`` of the image of ``domain``?

    Reports the point farthest from the image (lowest index on ties).
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    image = sorted(set(_images(sample, map, domain)))
    if not image:
        return DensityReport(False, 0 if sample.n else None, float("inf"))
    if sample.exact:
        gaps = [min(sample.dist[p][q] for q in image) for p in range(sample.n)]
    else:
        gaps = sample.as_array()[:, image].min(axis=1).tolist()
    worst = max(range(sample.n), key=lambda p: (gaps[p], -p))
    return DensityReport(gaps[worst] <= epsilon, worst, gaps[worst])
