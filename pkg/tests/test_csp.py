from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsim.csp import (
    FAILED,
    STABLE,
    And,
    Binary,
    BudgetExceeded,
    CondEqual,
    Element,
    FirstFail,
    Member,
    Network,
    Not,
    Or,
    SearchStats,
    SubclassSplit,
    Table,
    Ternary,
    load_subclass_family,
    mask_of,
    solve,
    solve_all,
    solve_with,
    values_of,
)

from oracles import all_solutions, random_network, support_fixpoint


def table_net(domains, constraints):
    net = Network()
    for d in domains:
        net.add_var(d)
    for scope, tuples in constraints:
        net.post(Table(scope, sorted(tuples)))
    return net


def test_mask_helpers():
    assert mask_of([0, 3]) == 0b1001
    assert values_of(0b1010) == [1, 3]


def test_empty_domain_rejected():
    with pytest.raises(ValueError):
        Network().add_var([])


def test_binary_propagation_example():
    net = Network()
    x = net.add_var([0, 1, 2])
    y = net.add_var([0, 1, 2])
    net.post(Binary.from_pairs(x, y, [(0, 1), (1, 2)]))
    assert net.propagate() == STABLE
    assert net.values(x) == [0, 1]
    assert net.values(y) == [1, 2]
    net.restrict(y, 1 << 2)
    assert net.propagate() == STABLE
    assert net.value(x) == 1


def test_ternary_wipe_out():
    net = Network()
    x, y, z = (net.add_var([0, 1]) for _ in range(3))
    net.post(Ternary.from_tuples(x, y, z, [(0, 0, 1), (1, 1, 0)]))
    assert net.propagate() == STABLE
    net.restrict(x, 1)
    net.restrict(z, 1)
    assert net.propagate() == FAILED


def test_trail_restores_domains():
    rng = random.Random(7)
    domains, constraints = random_network(rng)
    net = table_net(domains, constraints)
    before = net.snapshot()
    mark = net.mark()
    net.propagate()
    net.restrict(0, 1 << min(domains[0]))
    net.propagate()
    net.undo(mark)
    net.discard_pending()
    assert net.snapshot() == before


def test_propagation_matches_support_oracle():
    rng = random.Random(2024)
    for _ in range(300):
        domains, constraints = random_network(rng)
        net = table_net(domains, constraints)
        status = net.propagate()
        expected = support_fixpoint(domains, constraints)
        if status == FAILED:
            assert any(not d for d in expected)
        else:
            assert [set(net.values(v)) for v in range(len(domains))] == expected


def test_solve_agrees_with_enumeration():
    rng = random.Random(99)
    for _ in range(200):
        domains, constraints = random_network(rng)
        net = table_net(domains, constraints)
        sols = all_solutions(domains, constraints)
        got = solve(net)
        if sols:
            assert got is not None and tuple(got) in set(sols)
        else:
            assert got is None
        assert sorted(tuple(s) for s in solve_all(net)) == sorted(sols)


def test_failed_solve_keeps_pending_work():
    net = Network()
    x = net.add_var([0, 1, 2])
    net.post(Table((x,), [(2,)]))
    assert solve_with(net, {x: 0b011}) is None
    assert solve(net) == [2]
    assert solve_all(net) == [[2]]


def test_wipe_out_outside_propagation_is_remembered():
    net = Network()
    x = net.add_var([0, 1])
    y = net.add_var([0, 1])
    mark = net.mark()
    assert not net.restrict(x, 0b100)
    assert net.propagate() == FAILED
    assert solve(net) is None
    net.undo(mark)
    assert net.propagate() == STABLE
    assert solve(net) == [0, 0]
    net.restrict(y, 0)
    assert solve(net) is None


def test_solve_leaves_network_untouched():
    rng = random.Random(5)
    domains, constraints = random_network(rng, max_vars=4)
    net = table_net(domains, constraints)
    before = net.snapshot()
    solve(net)
    assert net.snapshot() == before


def test_solve_with_restrictions():
    net = Network()
    x = net.add_var([0, 1, 2])
    y = net.add_var([0, 1, 2])
    net.post(Binary.from_pairs(x, y, [(a, a) for a in range(3)]))
    assert solve_with(net, {x: 1 << 2}) == [2, 2]
    assert solve_with(net, {x: 1 << 2, y: 1 << 1}) is None
    assert net.values(x) == [0, 1, 2]
    assert solve(net) == [0, 0]


def test_first_fail_prefers_priority_then_size():
    net = Network()
    a = net.add_var(range(5), priority=1)
    b = net.add_var(range(2), priority=1)
    c = net.add_var(range(4), priority=0)
    split = FirstFail().split(net)
    assert split.var == c
    assert split.first == 1 and split.second == 0b1110
    net.restrict(c, 1)
    assert FirstFail().split(net).var == b
    net.restrict(b, 1)
    assert FirstFail().split(net).var == a


def test_seeded_ties_are_deterministic():
    def order(seed):
        net = Network()
        vs = [net.add_var([0, 1]) for _ in range(12)]
        strat = FirstFail(seed=seed)
        out = []
        for _ in vs:
            s = strat.split(net)
            out.append(s.var)
            net.restrict(s.var, s.first)
        return out

    assert order(3) == order(3)
    assert order(None) == list(range(12))
    assert sorted(order(3)) == list(range(12))


def test_subclass_split_keeps_first_branch_in_family(tmp_path):
    from qsim.calculus import builtin
    cal = builtin("rcc8")
    fam = tmp_path / "f.sub"
    fam.write_text("FAMILY rcc8\ndisjoint meet overlap\nequal covers\n")
    families = load_subclass_family(fam, {"rcc8": cal})
    strat = SubclassSplit(families)
    net = Network()
    v = net.add_var(cal.mask(["disjoint", "meet", "overlap", "inside"]), kind="rcc8")
    s = strat.split(net)
    assert s.first == cal.mask(["disjoint", "meet", "overlap"])
    assert s.second == cal.mask(["inside"])
    net = Network()
    net.add_var(cal.mask(["equal", "inside", "contains"]), kind="rcc8")
    s = strat.split(net)
    assert s.first == cal.mask(["equal"])


def test_subclass_family_errors(tmp_path):
    bad = tmp_path / "bad.sub"
    bad.write_text("disjoint\n")
    with pytest.raises(ValueError, match="before any FAMILY"):
        load_subclass_family(bad, {})
    bad.write_text("FAMILY nope\n")
    with pytest.raises(ValueError, match="known calculus"):
        load_subclass_family(bad, {})


def test_node_budget():
    net = Network()
    xs = [net.add_var(range(3)) for _ in range(6)]
    for a, b in itertools.combinations(xs, 2):
        net.post(Binary.from_pairs(a, b, [(i, j) for i in range(3) for j in range(3) if i != j]))
    stats = SearchStats()
    with pytest.raises(BudgetExceeded) as info:
        solve(net, node_limit=1, stats=stats)
    assert info.value.what == "node"
    assert solve(net) is None  # pigeonhole: six variables, three values


# --------------------------------------------------------------------------
# every propagator is GAC on its own scope


def _gac_check(make, domains):
    """Propagate one constraint and compare with brute-force supports."""
    net = Network()
    vs = [net.add_var(d) for d in domains]
    c = net.post(make(vs))
    status = net.propagate()
    supported = [set() for _ in vs]
    for combo in itertools.product(*[sorted(d) for d in domains]):
        a = dict(zip(vs, combo))
        if c.check(a):
            for i, val in enumerate(combo):
                supported[i].add(val)
    if status == FAILED:
        assert any(not s for s in supported)
    else:
        assert [set(net.values(v)) for v in vs] == supported


bools = st.sampled_from([{0}, {1}, {0, 1}])
small = st.sets(st.integers(0, 3), min_size=1)


@settings(max_examples=150, deadline=None)
@given(st.lists(bools, min_size=2, max_size=5), st.booleans())
def test_and_or_are_gac(domains, half):
    _gac_check(lambda vs: And(vs[0], vs[1:], half), domains)
    _gac_check(lambda vs: Or(vs[0], vs[1:], half), domains)


@settings(max_examples=100, deadline=None)
@given(bools, bools)
def test_not_is_gac(b, x):
    _gac_check(lambda vs: Not(vs[0], vs[1]), [b, x])


@settings(max_examples=150, deadline=None)
@given(bools, small, st.integers(1, 15), st.booleans())
def test_member_is_gac(b, x, mask, half):
    _gac_check(lambda vs: Member(vs[0], vs[1], mask, half), [b, x])


@settings(max_examples=150, deadline=None)
@given(small, small, st.lists(st.integers(0, 15), min_size=4, max_size=4))
def test_binary_is_gac(x, y, sup):
    _gac_check(lambda vs: Binary(vs[0], vs[1], sup), [x, y])


@settings(max_examples=150, deadline=None)
@given(small, small, small, st.sets(st.tuples(*[st.integers(0, 3)] * 3), max_size=20))
def test_ternary_is_gac(x, y, z, tuples):
    _gac_check(lambda vs: Ternary.from_tuples(vs[0], vs[1], vs[2], tuples or [(0, 0, 0)]), [x, y, z])


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(0, 3), min_size=1), st.integers(0, 3),
       st.lists(st.tuples(small, small), min_size=1, max_size=3))
def test_cond_equal_is_gac(l, j, pairs):
    doms = [l] + [p[0] for p in pairs] + [p[1] for p in pairs]
    n = len(pairs)
    _gac_check(lambda vs: CondEqual(vs[0], j, vs[1:1 + n], vs[1 + n:]), doms)


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(0, 4), min_size=1), small, st.lists(small, min_size=1, max_size=4))
def test_element_is_gac(index, value, elems):
    n = len(elems)
    _gac_check(lambda vs: Element(vs[0], vs[1], vs[2:2 + n]), [index, value] + elems)


def test_cond_equal_accepts_single_variables():
    net = Network()
    l = net.add_var([1, 2])
    x = net.add_var([0, 1])
    y = net.add_var([1, 2])
    net.post(CondEqual(l, 1, x, y))
    net.restrict(l, 1 << 1)
    assert net.propagate() == STABLE
    assert net.value(x) == net.value(y) == 1
    with pytest.raises(ValueError):
        CondEqual(l, 1, [x], [x, y])


def test_boolean_constants():
    net = Network()
    t, f = net.true, net.false
    assert net.value(t) == 1 and net.value(f) == 0
    assert net.true == t and net.const_bool(False) == f
