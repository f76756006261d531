from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netform.canonical import StarOnClique, build
from netform.cost import (
    ZERO,
    CostValue,
    GameParams,
    PaymentLedger,
    all_costs,
    delta_cost,
    extended_cost,
    pair_deltas,
    player_cost,
    social_cost,
    to_fraction,
    toggle_deltas,
)
from netform.graph import Action, DomainError, Topology, mutate_link
from oracles import oracle_cost, oracle_delta, oracle_social
from strategies import params, topologies


def path(n):
    return Topology.from_edges("B" * n, [(i, i + 1) for i in range(n - 1)])


def test_to_fraction_forms():
    assert to_fraction("3/2") == F(3, 2)
    assert to_fraction("0.1") == F(1, 10)
    assert to_fraction(0.1) == F(1, 10)
    assert to_fraction(5) == 5
    for bad in ("x", True, None, "1/0"):
        with pytest.raises(DomainError):
            to_fraction(bad)


def test_params_validation():
    p = GameParams("3/2", "5/2", 4)
    assert p.c == 2 and p.scaled() == (3, 5, 8, 2)
    with pytest.raises(DomainError):
        GameParams(1, 2, 1)
    with pytest.raises(DomainError):
        GameParams(3, 2, 4)
    with pytest.raises(DomainError):
        GameParams(-1, 2, 4)


def test_costvalue_ordering():
    assert CostValue(1, F(0)) > CostValue(0, F(10**9))
    assert CostValue(0, F(-1)).is_negative()
    assert CostValue(-1, F(50)).is_negative()
    assert ZERO.is_zero()


def test_two_linked_b_nodes():
    p = GameParams(1, 3, 2)
    t = path(2)
    assert player_cost(t, p, 0) == CostValue(0, F(4))
    assert social_cost(t, p) == CostValue(0, F(8))


def test_triangle_with_a_nodes():
    p = GameParams(2, 3, 4)
    t = Topology.from_edges("AAB", [(0, 1), (0, 2), (1, 2)])
    assert player_cost(t, p, 2) == CostValue(0, F(14))


def test_isolated_nodes_lexicographic():
    p = GameParams(1, 3, 2)
    assert player_cost(Topology.from_edges("BB"), p, 0) == CostValue(1, F(0))


def test_a_triangle_social():
    assert social_cost(Topology.from_edges("AAA", [(0, 1), (0, 2), (1, 2)]), GameParams(2, 2, 4)).finite_part == 36


def test_star_on_clique_221():
    p = GameParams(2, 2, 4)
    expected = 2 * 5 * (5 - 1 + 2 + 5 * (3 - F(1, 2))) + 3 * 2 * (2 + 4)
    assert expected == 221
    assert social_cost(build(StarOnClique(), 3, 5), p) == CostValue(0, F(221))


def test_path5_shortcut_delta():
    p = GameParams(1, 3, 2)
    assert delta_cost(path(5), p, 0, (0, 4), Action.ADD) == CostValue(0, F(-1))


def test_pendant_removal_disconnects():
    p = GameParams(1, 3, 2)
    t = path(4)
    d = delta_cost(t, p, 3, (2, 3), Action.REMOVE)
    assert d.unreachable_count == 3


def test_delta_on_existing_link_raises():
    with pytest.raises(DomainError):
        delta_cost(path(3), GameParams(1, 3, 2), 0, (0, 1), Action.ADD)


def test_extended_cost_examples():
    p = GameParams(1, 3, 2)
    t = path(2)
    assert extended_cost(t, p, PaymentLedger(), 0) == player_cost(t, p, 0)
    led = PaymentLedger({(0, 1): 1})
    assert extended_cost(t, p, led, 0).finite_part == 5
    assert extended_cost(t, p, led, 1).finite_part == 3


def test_ledger_validation():
    with pytest.raises(DomainError):
        PaymentLedger({(0, 1): -1})
    with pytest.raises(DomainError):
        PaymentLedger({(0, 1): 1}).check(Topology.from_edges("BB"))


@settings(max_examples=120, deadline=None)
@given(topologies(), params())
def test_player_cost_matches_oracle(top, p):
    for i, cv in enumerate(all_costs(top, p)):
        assert (cv.unreachable_count, cv.finite_part) == oracle_cost(top, p, i)
        assert player_cost(top, p, i) == cv
    sc = social_cost(top, p)
    assert (sc.unreachable_count, sc.finite_part) == oracle_social(top, p)


@settings(max_examples=120, deadline=None)
@given(topologies(min_n=2), params(), st.data())
def test_toggle_deltas_match_oracle(top, p, data):
    i = data.draw(st.integers(0, top.n - 1))
    mine, theirs = toggle_deltas(top, p, i)
    for j in range(top.n):
        if j == i:
            assert mine[j] is None
            continue
        assert (mine[j].unreachable_count, mine[j].finite_part) == oracle_delta(top, p, i, (i, j))
        assert (theirs[j].unreachable_count, theirs[j].finite_part) == oracle_delta(top, p, j, (i, j))
        assert pair_deltas(top, p, (i, j)) == ((mine[j], theirs[j]) if i < j else (theirs[j], mine[j]))


@settings(max_examples=100, deadline=None)
@given(topologies(min_n=2), params(), st.data())
def test_add_remove_antisymmetric(top, p, data):
    u = data.draw(st.integers(0, top.n - 1))
    v = data.draw(st.integers(0, top.n - 1).filter(lambda x: x != u))
    act = Action.REMOVE if top.has_link(u, v) else Action.ADD
    back = Action.ADD if act is Action.REMOVE else Action.REMOVE
    after = mutate_link(top, (u, v), act)
    for i in range(top.n):
        assert delta_cost(top, p, i, (u, v), act) + delta_cost(after, p, i, (u, v), back) == ZERO


@settings(max_examples=100, deadline=None)
@given(topologies(min_n=3, connected=True), params(), st.data())
def test_addition_helps_bystanders(top, p, data):
    absent = [(u, v) for u in range(top.n) for v in range(u + 1, top.n) if (u, v) not in top.links]
    if not absent:
        return
    u, v = data.draw(st.sampled_from(absent))
    for i in range(top.n):
        if i not in (u, v):
            assert not delta_cost(top, p, i, (u, v), Action.ADD).is_positive()


@settings(max_examples=100, deadline=None)
@given(topologies(min_n=2, connected=True), params(), st.data())
def test_transfers_cancel_in_social_cost(top, p, data):
    links = top.sorted_links()
    pays = data.draw(st.lists(st.tuples(st.sampled_from(links), st.booleans(), st.fractions(0, 20)), max_size=6))
    led = PaymentLedger()
    for (u, v), flip, amt in pays:
        led = led.with_payment(*((v, u) if flip else (u, v)), amt)
    assert led.balance() == 0
    total = sum((extended_cost(top, p, led, i) for i in range(top.n)), ZERO)
    assert total == social_cost(top, p)


def test_connected_costs_have_no_unreachable():
    p = GameParams(2, 2, 4)
    assert all(c.unreachable_count == 0 for c in all_costs(build(StarOnClique(), 2, 4), p))
