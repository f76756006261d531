import networkx as nx
import pytest
from hypothesis import given, settings

from netform.graph import (
    UNREACHABLE,
    Action,
    DomainError,
    PlayerType,
    Topology,
    canonical_pair,
    enumerate_labeled_graphs,
    mutate_link,
    read_edge_list,
    shortest_distances,
    write_edge_list,
)
from oracles import nx_graph
from strategies import topologies


def path(n, t="B"):
    return Topology.from_edges(t * n, [(i, i + 1) for i in range(n - 1)])


def test_path_distances():
    assert shortest_distances(path(3), 0).hops == {0: 0, 1: 1, 2: 2}


def test_isolated_pair_unreachable():
    d = shortest_distances(Topology.from_edges("BB"), 0)
    assert d[0] == 0 and d[1] is UNREACHABLE


def test_clique_all_at_one():
    k4 = Topology.from_edges("AABB", [(u, v) for u in range(4) for v in range(u + 1, 4)])
    for s in range(4):
        assert all(d == 1 for v, d in shortest_distances(k4, s).hops.items() if v != s)


def test_mutate_add_remove():
    empty = Topology.from_edges("BB")
    one = mutate_link(empty, (0, 1), Action.ADD)
    assert one.links == {(0, 1)}
    assert mutate_link(one, (0, 1), Action.REMOVE).links == frozenset()


def test_mutate_canonical_order():
    t = mutate_link(Topology.from_edges("BB"), (1, 0), Action.ADD)
    assert (0, 1) in t.links and t.has_link(1, 0)


def test_mutate_errors():
    t = path(2)
    with pytest.raises(DomainError):
        mutate_link(t, (0, 1), Action.ADD)
    with pytest.raises(DomainError):
        mutate_link(Topology.from_edges("BB"), (0, 1), Action.REMOVE)
    with pytest.raises(DomainError):
        mutate_link(t, (0, 5), Action.ADD)


def test_topology_rejects_bad_links():
    with pytest.raises(DomainError):
        Topology.from_edges("BB", [(0, 0)])
    with pytest.raises(DomainError):
        Topology.from_edges("BB", [(0, 2)])
    with pytest.raises(DomainError):
        canonical_pair(3, 3)


def test_player_type_order_and_parse():
    assert PlayerType.A < PlayerType.B
    assert PlayerType.parse(" a ") is PlayerType.A
    with pytest.raises(DomainError):
        PlayerType.parse("C")


@pytest.mark.parametrize("n_A,n_B,conn,count", [(0, 3, False, 8), (0, 3, True, 4), (1, 0, False, 1), (0, 4, True, 38)])
def test_enumeration_counts(n_A, n_B, conn, count):
    # 38 connected labeled graphs on 4 nodes (OEIS A001187)
    assert sum(1 for _ in enumerate_labeled_graphs(n_A, n_B, conn)) == count


def test_enumeration_limit():
    with pytest.raises(DomainError):
        next(enumerate_labeled_graphs(5, 5))


def test_edge_list_roundtrip(tmp_path):
    t = Topology.from_edges("AABBB", [(0, 1), (1, 2), (2, 3), (0, 4)])
    write_edge_list(t, tmp_path / "g.edges", tmp_path / "g.types", header="demo")
    assert read_edge_list(tmp_path / "g.edges", tmp_path / "g.types") == t
    untyped = read_edge_list(tmp_path / "g.edges")
    assert untyped.types == (PlayerType.B,) * 5 and untyped.links == t.links


def test_edge_list_bad_line(tmp_path):
    (tmp_path / "bad.edges").write_text("0 1 2\n")
    with pytest.raises(DomainError):
        read_edge_list(tmp_path / "bad.edges")


@settings(max_examples=150, deadline=None)
@given(topologies())
def test_distances_match_networkx(top):
    g = nx_graph(top)
    for s in range(top.n):
        ref = nx.single_source_shortest_path_length(g, s)
        got = shortest_distances(top, s).hops
        for v in range(top.n):
            assert got[v] == ref.get(v, UNREACHABLE)


@settings(max_examples=100, deadline=None)
@given(topologies(min_n=2))
def test_distances_symmetric_and_triangle(top):
    tables = [shortest_distances(top, s).hops for s in range(top.n)]
    for u in range(top.n):
        for v in range(top.n):
            assert tables[u][v] == tables[v][u]
    for u, v in top.links:
        for w in range(top.n):
            if tables[u][w] is not UNREACHABLE:
                assert tables[v][w] <= tables[u][w] + 1


@settings(max_examples=100, deadline=None)
@given(topologies(min_n=2))
def test_add_then_remove_is_identity(top):
    u, v = 0, top.n - 1
    act = Action.REMOVE if top.has_link(u, v) else Action.ADD
    back = Action.ADD if act is Action.REMOVE else Action.REMOVE
    assert mutate_link(mutate_link(top, (u, v), act), (u, v), back) == top
