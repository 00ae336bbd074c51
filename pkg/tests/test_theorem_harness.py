import itertools
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expanse import dial_rotation as dial
from expanse.expansion_analysis import Tag
from expanse.gallery import counterexample_point, counterexample_space, sup_distance
from expanse.metric_core import DomainError, FiniteMetricSpace, SelfMap, validate_metric
from expanse.theorem_harness import (
    BudgetExceeded,
    cycle_lengths,
    enumerate_expansive_maps,
    exhaustive_spaces,
    no_anticontraction_check,
    random_space,
    recurrence_search,
    scan_expansive,
    verify_compact_theorem,
    verify_counterexample,
)


def brute_expansive(space):
    """Independent oracle: itertools over every table, exact comparisons."""
    n = space.n
    out = []
    for t in itertools.product(range(n), repeat=n):
        if all(space.d(t[i], t[j]) >= space.d(i, j)
               for i, j in itertools.combinations(range(n), 2)):
            out.append(t)
    return out


def tables(tagged):
    return sorted(tm.map.table for tm in tagged)


def test_two_point_space():
    sp = FiniteMetricSpace.build([[0, 1], [1, 0]])
    maps = enumerate_expansive_maps(sp)
    assert tables(maps) == [(0, 1), (1, 0)] == brute_expansive(sp)
    assert all(tm.cls.tag is Tag.ISOMETRY for tm in maps)
    rep = verify_compact_theorem(sp)
    assert rep.passed and rep.expansive_count == 2 and rep.maps_scanned == 4


def test_degenerate_triangle_has_only_identity():
    sp = FiniteMetricSpace.build([[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    assert tables(enumerate_expansive_maps(sp)) == [(0, 1, 2)] == brute_expansive(sp)


def test_equilateral_has_all_permutations():
    sp = FiniteMetricSpace.build([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    maps = enumerate_expansive_maps(sp)
    assert tables(maps) == sorted(itertools.permutations(range(3)))
    assert {tm.cls.tag for tm in maps} == {Tag.ISOMETRY}


def test_singleton_is_vacuous():
    sp = FiniteMetricSpace.build([[0]])
    rep = verify_compact_theorem(sp)
    assert rep.passed and rep.maps_scanned == 1 and rep.expansive_count == 1


def test_exhaustive_generator_against_brute_force():
    spaces = list(exhaustive_spaces(4))
    assert len(spaces) == 510
    assert all(validate_metric(s).ok for s in spaces)
    for s in spaces[::7]:
        assert sorted(scan_expansive(s).tables) == brute_expansive(s)


def test_float_space_matches_exact():
    rng = np.random.default_rng(11)
    for _ in range(20):
        sp = random_space(rng, 4)
        fl = FiniteMetricSpace.build([[float(v) for v in row] for row in sp.dist], exact=False)
        assert sorted(scan_expansive(fl).tables) == sorted(scan_expansive(sp).tables)


def test_pruned_scan_agrees_with_full_scan():
    rng = np.random.default_rng(12)
    for n in (3, 4, 5):
        for _ in range(10):
            sp = random_space(rng, n, high=3)
            full = scan_expansive(sp)
            pruned = scan_expansive(sp, budget=1)
            assert full.method == "full" and pruned.method == "pruned-injective"
            assert sorted(full.tables) == sorted(pruned.tables)


def test_budget_exceeded():
    sp = counterexample_space(13)
    with pytest.raises(BudgetExceeded) as err:
        scan_expansive(sp)
    assert err.value.required == 13 ** 13


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_expansive_maps_are_bijective_isometries(n, seed):
    sp = random_space(np.random.default_rng(seed), n, high=4)
    rep = verify_compact_theorem(sp)
    assert rep.passed and rep.counterexample is None
    assert rep.expansive_count <= n ** n


def test_recurrence_identity():
    sp = FiniteMetricSpace.build([[0, 2], [2, 0]])
    res = recurrence_search(sp, SelfMap.identity(2), 1, Fraction(1, 10), 5)
    assert res.found and res.n == 1 and res.distance == 0


def _mp_scan(eps, limit):
    mpmath.mp.dps = 50
    for n in range(1, limit + 1):
        d = abs(mpmath.expj(n) - 1)
        if d <= eps:
            return n, d
    return None, None


@pytest.mark.parametrize("eps,limit,expected", [(0.02, 100, 44), (1e-4, 1000, 710)])
def test_dial_recurrence_against_high_precision_scan(eps, limit, expected):
    n, d = _mp_scan(eps, limit)
    assert n == expected
    res = recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), eps, limit)
    assert res.found and res.n == expected
    assert res.distance == pytest.approx(float(d), rel=1e-9)


def test_dial_recurrence_values():
    r44 = recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), 0.02, 100)
    assert r44.distance == pytest.approx(0.01770, abs=1e-5)
    r710 = recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), 1e-4, 1000)
    # |710 - 226*pi| is 6.03e-5, not 3.0e-5
    assert r710.distance == pytest.approx(6.0288e-5, rel=1e-4)


def test_recurrence_not_found_and_errors():
    res = recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), 1e-3, 40)
    oracle = min(range(1, 41), key=lambda n: abs(n - 2 * np.pi * round(n / (2 * np.pi))))
    assert not res.found and res.best_n == oracle == 25
    with pytest.raises(DomainError):
        recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), -1, 10)
    with pytest.raises(DomainError):
        recurrence_search(dial.chord, dial.rotate, dial.dial_point(0), 0.1, 0)


def test_cycle_lengths():
    assert sorted(cycle_lengths((1, 2, 0, 4, 3, 5))) == [1, 2, 3]


def test_counterexample_distances_from_sequences():
    for m, n in itertools.combinations(range(1, 8), 2):
        d = sup_distance(counterexample_point(m), counterexample_point(n))
        assert d == 1 + Fraction(1, min(m, n))
    sp = counterexample_space(5)
    assert sp.d(0, 2) == 2
    assert sp.d(1, 3) == Fraction(3, 2)


@pytest.mark.parametrize("N", [5, 8])
def test_counterexample_truncation_admits_tail_swap(N):
    # d(x_k, x_{N-1}) = 1 + 1/k = d(x_k, x_N) for k < N - 1, so swapping the
    # last two points of any finite truncation is an isometry.
    rep = verify_counterexample(N)
    swap = tuple(range(N - 2)) + (N - 1, N - 2)
    assert rep.formula_ok and rep.all_above_one and rep.diameter_two
    assert rep.net_size == N
    assert set(rep.expansive_maps) == {tuple(range(N)), swap}
    assert not rep.only_identity
    if N == 5:
        assert set(rep.expansive_maps) == set(brute_expansive(counterexample_space(N)))


def test_no_anticontraction_examples():
    assert no_anticontraction_check(FiniteMetricSpace.build([[0, 1], [1, 0]])).ok
    sp = FiniteMetricSpace.from_points([0, 1, 2], lambda x, y: abs(x - y))
    assert no_anticontraction_check(sp).ok
    # doubling leaves {0, 1, 2}, so it cannot be given as a self-map
    from expanse.metric_core import MapError
    with pytest.raises(MapError):
        SelfMap.from_rule_on([0, 1, 2], lambda x: 2 * x)


def test_no_anticontraction_all_small_spaces():
    assert all(no_anticontraction_check(s).ok for s in exhaustive_spaces(3))
