"""Named verification suites behind ``expanse verify``.

Each suite returns a list of :class:`Check` records; a suite passes iff
every check does.  Nothing here reads the clock, so reports for the same
configuration are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dial_rotation as dial
from . import sparse_builder as sb
from .expansion_analysis import is_surjective, range_density
from .theorem_harness import (
    DEFAULT_BUDGET,
    exhaustive_spaces,
    no_anticontraction_check,
    random_spaces,
    recurrence_search,
    verify_compact_theorem,
    verify_counterexample,
)


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "details": self.details}


def _compact_instances(max_size: int, random_instances: int, seed: int):
    yield from (("exhaustive", s) for s in exhaustive_spaces(max_size))
    sizes = tuple(range(2, max_size + 1)) or (1,)
    yield from (("random", s) for s in random_spaces(seed, random_instances, sizes))


def _compact_one(args):
    space, budget, tol = args
    return verify_compact_theorem(space, budget, tol)


def suite_compact(max_size: int = 4, random_instances: int = 1000, seed: int = 0,
                  budget: int = DEFAULT_BUDGET, tol: float | None = None,
                  workers: int = 1, **_) -> list[Check]:
    inst = list(_compact_instances(max_size, random_instances, seed))
    jobs = [(s, budget, tol) for _, s in inst]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_compact_one, jobs, chunksize=32))
    else:
        reports = [_compact_one(j) for j in jobs]
    checks = []
    for origin in ("exhaustive", "random"):
        reps = [(s, r) for (o, s), r in zip(inst, reports) if o == origin]
        bad = [(s, r) for s, r in reps if not r.all_expansive_are_isometric_bijections]
        checks.append(Check(
            f"compact theorem: {origin} spaces of size <= {max_size}", not bad,
            {"instances": len(reps), "expansive_maps": sum(r.expansive_count for _, r in reps),
             "counterexamples": [{"space": s.to_json_obj(), "image": list(r.counterexample)}
                                 for s, r in bad[:5]]}))
        checks.append(Check(
            f"cross-checks (pair sums, recurrence, no anticontraction): {origin}",
            all(r.sum_preserved and r.recurrence_ok and r.no_anticontraction for _, r in reps),
            {"instances": len(reps)}))
    return checks


def suite_counterexample(n: int = 5, budget: int = DEFAULT_BUDGET, **_) -> list[Check]:
    rep = verify_counterexample(n, budget)
    obj = rep.to_json_obj()
    tail_swap = tuple(range(n - 2)) + (n - 1, n - 2)
    return [
        Check(f"distance formula 1 + 1/min(m, n), N = {n}", rep.formula_ok),
        Check("all pairwise distances exceed 1", rep.all_above_one),
        Check("d(x1, xn) = 2 = diameter", rep.diameter_two),
        Check("minimum 0.5-net has N points", rep.net_size == n, {"net_size": rep.net_size}),
        Check("only expansive self-map is the identity", rep.only_identity,
              {"expansive_maps": obj["expansive_maps"], "method": rep.method}),
        Check("expansive maps fix x1..x_{N-2} (identity or last-pair swap)",
              set(rep.expansive_maps) <= {tuple(range(n)), tail_swap},
              {"expansive_maps": obj["expansive_maps"]}),
    ]


def rotation_isometry_defect(count: int, block: int = 512) -> float:
    """max |d(Rp_m, Rp_n) - d(p_m, p_n)| over m, n < count, from coordinates."""
    pts = np.array([dial.dial_point(k).coords for k in range(count + 1)])
    worst = 0.0
    for lo in range(0, count, block):
        hi = min(lo + block, count)
        a = pts[lo:hi, None, :] - pts[None, :count, :]
        b = pts[lo + 1:hi + 1, None, :] - pts[None, 1:count + 1, :]
        diff = np.abs(np.hypot(b[..., 0], b[..., 1]) - np.hypot(a[..., 0], a[..., 1]))
        worst = max(worst, float(diff.max()))
    return worst


def suite_dial(epsilon: float = 0.05, points: int = 1000, isometry_points: int = 10_000,
               **_) -> list[Check]:
    defect = rotation_isometry_defect(isometry_points)
    n100, m100 = dial.return_margin(100)
    nbig, mbig = dial.return_margin(isometry_points)
    space = dial.dial_space(points)
    rot = dial.rotation_map()
    dens = range_density(space, rot, epsilon, domain=range(points - 1))
    surj = is_surjective(dial.dial_space(points + 1), rot, domain=range(points))
    r44 = recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), 0.02, 100)
    r710 = recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), 1e-4, 1000)
    seq = dial.approach_sequence(0, 3)
    lim = dial.find_limit_point(epsilon, points)
    return [
        Check(f"rotation is an isometry to 1e-12 on {isometry_points} points", defect <= 1e-12,
              {"max_defect": defect}),
        Check("e^{i0} farther than 1.7e-2 from the rotated first 100 points", m100 > 1.7e-2,
              {"nearest_index": n100, "distance": m100}),
        Check(f"e^{{i0}} not in the image of the first {isometry_points} points", mbig > 0,
              {"nearest_index": nbig, "distance": mbig}),
        Check(f"rotation misses e^{{i0}} on the first {points} points",
              surj.missing == (0,), surj.to_json_obj()),
        Check(f"range is {epsilon}-dense on the first {points} points", dens.dense,
              dens.to_json_obj()),
        Check("first return within 0.02 at n = 44", r44.n == 44, r44.to_json_obj()),
        Check("first return within 1e-4 at n = 710", r710.n == 710, r710.to_json_obj()),
        Check("approach sequence to e^{i0} is [44, 333, 710] with decreasing errors",
              list(seq.indices) == [44, 333, 710]
              and all(a > b for a, b in zip(seq.errors, seq.errors[1:])),
              seq.to_json_obj()),
        Check(f"limit-point cluster of >= 3 dial points within {epsilon}", lim.found,
              lim.to_json_obj()),
    ]


def _sparse_checks(scan_budget: int) -> list[Check]:
    s = sb.greedy_sparse(sb.integer_line(), 4, scan_budget)
    checks = [Check("greedy sparse set on the integers is [0, 1, 4, 13]",
                    list(s.points) == [0, 1, 4, 13], s.to_json_obj())]
    try:
        cert = sb.certify_anticontraction(s)
        checks.append(Check("shift on [0, 1, 4, 13] certified with E = 3 > 2",
                            cert.E_achieved == 3, cert.to_json_obj()))
    except sb.CertificateError as exc:
        checks.append(Check("shift on [0, 1, 4, 13] certified with E = 3 > 2", False,
                            {"error": str(exc)}))
    for name in sb.UNBOUNDED:
        s = sb.greedy_sparse(sb.ORACLES[name](), 5, scan_budget)
        ok, det = s.complete, s.to_json_obj()
        if ok:
            try:
                det["certificate"] = sb.certify_anticontraction(s).to_json_obj()
                ok = sb.iterate_divergence_ok(s)
            except sb.CertificateError as exc:
                ok, det["error"] = False, str(exc)
        checks.append(Check(f"unbounded oracle '{name}' supports an anticontraction", ok, det))
    for name in sb.BOUNDED:
        s = sb.greedy_sparse(sb.ORACLES[name](), 5, scan_budget)
        checks.append(Check(f"bounded oracle '{name}' exhausts the scan budget",
                            not s.complete, {"found": len(s), "scanned": s.scanned}))
    return checks


def suite_sparse(scan_budget: int = 20_000, **_) -> list[Check]:
    return _sparse_checks(scan_budget)


def suite_boundedness(max_size: int = 4, budget: int = DEFAULT_BUDGET,
                      tol: float | None = None, scan_budget: int = 20_000, **_) -> list[Check]:
    bad, count = [], 0
    for s in exhaustive_spaces(max_size):
        count += 1
        rep = no_anticontraction_check(s, tol, budget=budget)
        if not rep.ok:
            bad.append({"space": s.to_json_obj(), **rep.to_json_obj()})
    checks = [Check(f"no subset of any space of size <= {max_size} supports an anticontraction",
                    not bad, {"instances": count, "offenders": bad[:5]})]
    return checks + _sparse_checks(scan_budget)


SUITES: dict[str, Callable[..., list[Check]]] = {
    "compact": suite_compact,
    "counterexample": suite_counterexample,
    "dial": suite_dial,
    "sparse": suite_sparse,
    "boundedness": suite_boundedness,
}
