from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from treeflow import ksubmod as ks
from treeflow.flow_engine import INF

from gen import random_termsum, random_unary_table


def legal_cuts(rep):
    for x in itertools.product(*(range(len(nodes)) for nodes in rep.node)):
        yield x, rep.cut_of(x)


def cut_value(net, X):
    return sum(c for u, v, c in zip(net.tails, net.heads, net.uppers)
               if u in X and v not in X)


def test_meet_and_join():
    assert ks.square_join((0, 2), (1, 2)) == (1, 2)
    assert ks.square_join((1, 2), (2, 2)) == (0, 2)
    assert ks.meet((1, 2), (1, 1)) == (1, 0)
    assert ks.meet((1, 2), (0, 0)) == (0, 0)


def test_basic_term_tables():
    assert [ks.theta(1, u) for u in range(3)] == [0, -1, 1]
    assert [ks.theta(0, u) for u in range(3)] == [0, 1, 1]
    assert [ks.epsilon(2, u) for u in range(3)] == [0, 0, 1]
    assert ks.mu(1, 2, 0, 0) == 0
    assert ks.mu(1, 2, 2, 1) == 2
    assert all(ks.delta((0, 1, 2), u, u) == 0 for u in range(3))
    assert ks.delta((0, 2, 1), 1, 2) == 0
    assert ks.delta((0, 2, 1), 1, 1) == 2
    assert ks.delta((0, 2, 1), 0, 1) == 1


def test_basic_terms_are_ksubmodular():
    for k in (1, 2, 3):
        pts = range(k + 1)
        for a in pts:
            assert ks.check_ksubmodular(lambda x, a=a: ks.theta(a, x[0]), [k])
            if a:
                assert ks.check_ksubmodular(lambda x, a=a: ks.epsilon(a, x[0]), [k])
            for b in pts:
                assert ks.check_ksubmodular(lambda x, a=a, b=b: ks.mu(a, b, *x), [k, k])
        for perm in itertools.permutations(range(1, k + 1)):
            sigma = (0, *perm)
            assert ks.check_ksubmodular(lambda x, s=sigma: ks.delta(s, *x), [k, k])


def test_check_ksubmodular_detects_violation():
    # reward both coordinates for disagreeing nonzero labels
    table = {(1, 2): -5, (2, 1): -5}
    assert not ks.check_ksubmodular(lambda x: table.get(tuple(x), 0), [2, 2])
    assert ks.check_ksubmodular(lambda x: 0, [])


def test_normalize_unary():
    form = ks.normalize_unary((0, -1, 3))
    assert form.offset == 0 and form.a == 1 and form.theta_coef == 1
    assert form.eps == {2: 2}
    const = ks.normalize_unary((4, 4, 4))
    assert const.offset == 4 and const.theta_coef == 0 and not const.eps
    fixed = ks.normalize_unary((INF, 5, INF))
    assert fixed.fixed == 1 and fixed.offset == 5


def test_normalize_unary_errors():
    with pytest.raises(ks.AllInfinite):
        ks.normalize_unary((INF, INF))
    with pytest.raises(ks.NotKSubmodular):
        ks.normalize_unary((INF, 1, 2))
    # f(1) + f(2) < 2 f(0) breaks the one-variable inequality
    with pytest.raises(ks.NotKSubmodular):
        ks.normalize_unary((0, -1, -1))


def test_normalize_unary_reconstructs_table():
    rng = random.Random(3)
    for _ in range(200):
        k = rng.randint(1, 4)
        table = random_unary_table(rng, k)
        form = ks.normalize_unary(table)
        for u in range(k + 1):
            v = form.offset + form.theta_coef * ks.theta(form.a, u)
            v += sum(c * ks.epsilon(b, u) for b, c in form.eps.items())
            assert v == table[u]


def test_theta_network():
    f = ks.TermSum([2], [ks.Theta(0, 1)])
    rep = ks.build_network(f)
    edges = sorted(zip(rep.net.tails, rep.net.heads, rep.net.uppers))
    v1, v2 = rep.node[0][1], rep.node[0][2]
    assert edges == sorted([(rep.s, v1, 1), (v2, rep.t, 1)])
    assert rep.K == 1
    assert cut_value(rep.net, rep.cut_of((1,))) == 0


def test_epsilon_network():
    rep = ks.build_network(ks.TermSum([2], [ks.Epsilon(0, 1)]))
    assert list(zip(rep.net.tails, rep.net.heads, rep.net.uppers)) == [(rep.node[0][1], rep.t, 1)]


def test_delta_network_is_bidirectional():
    rep = ks.build_network(ks.TermSum([2, 2], [ks.Delta(0, 1, (0, 1, 2))]))
    edges = set(zip(rep.net.tails, rep.net.heads))
    for u in (1, 2):
        a, b = rep.node[0][u], rep.node[1][u]
        assert (a, b) in edges and (b, a) in edges
    assert len(edges) == 4


def test_minimize_examples():
    assert ks.minimize(ks.TermSum([2], [ks.Theta(0, 1)])) == ((1,), -1)
    f = ks.TermSum([2, 2], [ks.Delta(0, 1, (0, 1, 2)), ks.Theta(0, 1)])
    assert ks.minimize(f) == ((1, 1), -1)
    assert ks.minimize(ks.TermSum([2, 3], [], Fraction(7)))[1] == 7


def test_minimize_with_hard_constraints():
    f = ks.TermSum([2, 2], [ks.Unary(0, (INF, 5, INF)), ks.Delta(0, 1, (0, 2, 1))])
    x, v = ks.minimize(f)
    assert x == (1, 2) and v == 5
    with pytest.raises(ks.AllInfinite):
        ks.minimize(ks.TermSum([2, 2], [ks.Unary(0, (INF, 5, INF)),
                                        ks.Unary(0, (INF, INF, 1))]))


def test_fractional_weights_scale_the_network():
    f = ks.TermSum([1], [ks.Theta(0, 1, Fraction(1, 2))], Fraction(1, 3))
    rep = ks.build_network(f)
    assert rep.scale == 6
    assert ks.minimize(f) == ((1,), Fraction(-1, 6))


def test_validate_rejects_bad_terms():
    bad = [
        ks.TermSum([2], [ks.Theta(0, 3)]),
        ks.TermSum([2], [ks.Epsilon(0, 0)]),
        ks.TermSum([2, 3], [ks.Delta(0, 1, (0, 1, 2))]),
        ks.TermSum([2, 2], [ks.Delta(0, 1, (1, 0, 2))]),
        ks.TermSum([2], [ks.Theta(0, 1, Fraction(-1))]),
        ks.TermSum([2], [ks.Unary(0, (0, 1))]),
        ks.TermSum([2], [ks.Mu(0, 1, 0, 0)]),
    ]
    for f in bad:
        with pytest.raises(ValueError):
            f.validate()


def test_legalize_drops_crowded_groups():
    rep = ks.build_network(ks.TermSum([3, 2], []))
    X = {rep.s, rep.node[0][1], rep.node[0][3], rep.node[1][2]}
    assert rep.legalize(X) == {rep.s, rep.node[1][2]}
    assert rep.point_of(X) is None
    assert rep.point_of(rep.legalize(X)) == (0, 2)


def test_termsum_from_json():
    f = ks.termsum_from_json({
        "arities": [2, 2],
        "terms": [{"kind": "theta", "i": 0, "a": 1, "weight": "1/2"},
                  {"kind": "delta", "i": 0, "j": 1, "sigma": [0, 2, 1]},
                  {"kind": "unary", "i": 1, "table": [0, "inf", 3]}],
        "offset": "3/2",
    })
    assert ks.minimize(f) == ((0, 0), Fraction(3, 2))
    assert ks.eval_termsum(f, (1, 2)) == 4
    assert ks.eval_termsum(f, (1, 1)) == INF
    with pytest.raises(ValueError):
        ks.termsum_from_json({"arities": [1], "terms": [{"kind": "bogus", "i": 0}]})


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_minimize_matches_brute_force(seed):
    f = random_termsum(random.Random(seed))
    x, v = ks.minimize(f)
    assert ks.brute_force_min(f)[1] == v == ks.eval_termsum(f, x)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_representation_conditions(seed):
    f = random_termsum(random.Random(seed), max_n=4, max_k=3)
    rep = ks.build_network(f)
    for x, X in legal_cuts(rep):
        val = ks.eval_termsum(f, x)
        cut = cut_value(rep.net, X)
        if val == INF:
            assert cut == INF
        else:
            assert cut == rep.scale * val + rep.K
    nodes = [v for grp in rep.node for v in grp[1:]]
    for r in range(len(nodes) + 1):
        for extra in itertools.combinations(nodes, r):
            X = {rep.s, *extra}
            assert cut_value(rep.net, rep.legalize(X)) <= cut_value(rep.net, X)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_termsums_are_ksubmodular(seed):
    f = random_termsum(random.Random(seed), max_n=3, max_k=3)
    assert ks.check_ksubmodular(lambda x: ks.eval_termsum(f, x), f.arities)
