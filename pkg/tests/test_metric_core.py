import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expanse import dial_rotation as dial
from expanse.gallery import counterexample_space
from expanse.metric_core import (
    DomainError,
    FiniteMetricSpace,
    MapError,
    MetricOracle,
    MetricStructureError,
    SelfMap,
    diameter,
    iterate,
    min_epsilon_net,
    validate_metric,
)
from expanse.theorem_harness import random_space


def space(rows):
    return FiniteMetricSpace.build(rows)


@st.composite
def metric_spaces(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_space(np.random.default_rng(seed), n)


def test_two_point_space_is_valid():
    assert validate_metric(space([[0, 1], [1, 0]])).ok


def test_triangle_violation_witness():
    rep = validate_metric(space([[0, 1, 3], [1, 0, 1], [3, 1, 0]]))
    assert [(v.code, v.witness) for v in rep.violations] == [("triangle", (0, 1, 2))]


def test_degenerate_triangle_is_valid():
    d = [[0, 1, 3], [1, 0, 2], [3, 2, 0]]
    # hand oracle over all ordered triples of distinct points
    for i, j, k in itertools.permutations(range(3)):
        assert d[i][k] <= d[i][j] + d[j][k]
    assert validate_metric(space(d)).ok


def test_other_axiom_codes():
    rep = validate_metric(space([[1, 2], [3, 0]]))
    assert rep.codes() == {"nonzero_diagonal", "asymmetric"}
    rep = validate_metric(space([[0, 0], [0, 0]]))
    assert rep.codes() == {"nonpositive_distance"}


def test_dimension_mismatch_is_structural():
    with pytest.raises(MetricStructureError):
        FiniteMetricSpace.build([[0, 1], [1, 0]], labels=["a", "b", "c"])
    with pytest.raises(MetricStructureError):
        FiniteMetricSpace.build([[0, 1], [1]])


def test_float_tolerance_on_triangle():
    eps = 1e-12
    d = [[0, 1, 2 + eps], [1, 0, 1], [2 + eps, 1, 0]]
    assert validate_metric(space(d)).ok
    assert not validate_metric(space(d), tol=0).ok


def test_json_roundtrip_and_exact_mode():
    text = json.dumps({"labels": ["a", "b", "c"], "dist": [[0, "1/2", 1], ["1/2", 0, "1/2"],
                                                           [1, "1/2", 0]]})
    sp = FiniteMetricSpace.from_json(text)
    assert sp.exact and sp.d(0, 1) == Fraction(1, 2)
    again = FiniteMetricSpace.from_json(json.dumps(sp.to_json_obj()))
    assert again == sp
    assert validate_metric(sp).to_json_obj() == {"valid": True, "violations": []}
    fl = FiniteMetricSpace.from_json('{"dist": [[0, 0.5], [0.5, 0]]}')
    assert not fl.exact and fl.labels == ("0", "1")


def test_diameter_examples():
    assert diameter(space([[0, 1], [1, 0]])) == 1
    assert diameter(counterexample_space(6)) == 2
    assert diameter(dial.dial_space(50)) <= 2
    assert diameter(space([[0]])) == 0
    with pytest.raises(DomainError):
        diameter(FiniteMetricSpace((), ()))


def test_epsilon_net_examples():
    sp = counterexample_space(8)
    assert min_epsilon_net(sp, 3).size == 1
    net = min_epsilon_net(sp, Fraction(1, 2))
    assert net.size == 8 and net.optimal


def test_epsilon_net_greedy_on_dial_points_against_milp():
    scipy_opt = pytest.importorskip("scipy.optimize")
    sp = dial.dial_space(100)
    net = min_epsilon_net(sp, 0.25)
    assert not net.optimal
    a = (sp.as_array() <= 0.25).astype(float)
    res = scipy_opt.milp(np.ones(100), constraints=scipy_opt.LinearConstraint(a, lb=1),
                         integrality=np.ones(100), bounds=scipy_opt.Bounds(0, 1))
    optimum = round(res.fun)
    assert optimum <= net.size <= 26
    covered = (sp.as_array()[list(net.centers)] <= 0.25).any(axis=0)
    assert covered.all()


@settings(max_examples=60, deadline=None)
@given(metric_spaces(max_n=7), st.integers(1, 12))
def test_exact_net_matches_subset_brute_force(sp, e):
    eps = Fraction(e, 2)
    net = min_epsilon_net(sp, eps)
    for k in range(1, sp.n + 1):
        if any(all(any(sp.d(c, p) <= eps for c in cs) for p in range(sp.n))
               for cs in itertools.combinations(range(sp.n), k)):
            break
    assert net.size == k


@settings(max_examples=60, deadline=None)
@given(metric_spaces())
def test_space_invariants(sp):
    assert validate_metric(sp).ok
    assert diameter(sp) == max(max(r) for r in sp.dist)
    sizes = [min_epsilon_net(sp, Fraction(e, 2)).size for e in range(1, 22)]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))
    if sp.n > 1:
        assert diameter(sp.restrict(range(sp.n - 1))) <= diameter(sp)


def test_iterate_examples():
    ident = SelfMap.identity(4)
    assert iterate(ident, 2, 10) == 2
    cyc = SelfMap.from_table([1, 2, 0])
    assert all(iterate(cyc, x, 3) == x for x in range(3))
    assert iterate(SelfMap(rule=lambda n: n + 1), 0, 3) == 3
    assert dial.dial_point(iterate(SelfMap(rule=dial.rotate), dial.dial_point(0), 3).n) \
        == dial.dial_point(3)
    with pytest.raises(DomainError):
        iterate(ident, 0, -1)


@given(st.lists(st.integers(0, 5), min_size=6, max_size=6), st.integers(0, 5),
       st.integers(0, 20), st.integers(0, 20))
def test_iterate_composes(table, x, m, n):
    f = SelfMap.from_table(table)
    assert iterate(f, x, m + n) == iterate(f, iterate(f, x, m), n)


def test_self_map_rejects_images_outside_space():
    with pytest.raises(MapError):
        SelfMap.from_table([0, 3], 2)
    with pytest.raises(MapError):
        SelfMap.from_rule_on([0, 1, 2], lambda x: 2 * x)
    with pytest.raises(MapError):
        SelfMap.from_json('{"image": [0, 1]}', 3)


def test_oracle_sample_and_spot_check():
    o = MetricOracle("line", lambda k: k, lambda x, y: abs(x - y), exact=True)
    sp = o.sample(5)
    assert sp.exact and sp.d(1, 4) == 3
    assert o.spot_check(20).ok
    bad = MetricOracle("bad", lambda k: k, lambda x, y: (x - y) ** 2)
    assert "triangle" in bad.spot_check(20).codes()
