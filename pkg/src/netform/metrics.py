"""Graph analytics: k-cores, induced density, node-core distance and a
preferential-attachment baseline.

Functions accept either a :class:`~netform.graph.Topology` or a plain
``networkx.Graph``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import networkx as nx

from .graph import DomainError, Topology


def as_graph(g) -> nx.Graph:
    if isinstance(g, nx.Graph):
        return g
    if isinstance(g, Topology):
        out = nx.Graph()
        out.add_nodes_from(range(g.n))
        out.add_edges_from(g.sorted_links())
        return out
    raise DomainError(f"expected a Topology or networkx Graph, got {type(g).__name__}")


def coreness(g) -> dict[int, int]:
    """Largest ``k`` for which each node survives in the ``k``-core."""
    G = as_graph(g)
    if nx.number_of_selfloops(G):
        G = G.copy()
        G.remove_edges_from(nx.selfloop_edges(G))
    return dict(nx.core_number(G))


def k_core(g, k: int) -> frozenset:
    """Nodes of the ``k``-core (peeling fixed point, possibly empty)."""
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    return frozenset(v for v, c in coreness(g).items() if c >= k)


def k_core_components(g, k: int) -> list[frozenset]:
    """The ``k``-core split into connected components, largest first."""
    G = as_graph(g)
    core = G.subgraph(k_core(G, k))
    comps = [frozenset(c) for c in nx.connected_components(core)]
    return sorted(comps, key=lambda c: (-len(c), min(c)))


def subgraph_density(g, nodes: Iterable) -> Fraction:
    nodes = set(nodes)
    if len(nodes) < 2:
        raise DomainError("density needs at least two nodes")
    G = as_graph(g)
    missing = nodes - set(G.nodes)
    if missing:
        raise DomainError(f"nodes not in graph: {sorted(missing)}")
    m = G.subgraph(nodes).number_of_edges()
    k = len(nodes)
    return Fraction(2 * m, k * (k - 1))


@dataclass(frozen=True)
class CoreDistance:
    mean: Fraction | None  # None when no shell node reaches the core
    reached: int
    unreachable: int
    per_node: dict


def mean_node_core_distance(g, core: Iterable, shell: Iterable) -> CoreDistance:
    core, shell = set(core), set(shell)
    if not core:
        raise DomainError("core must be non-empty")
    if core & shell:
        raise DomainError("core and shell overlap")
    G = as_graph(g)
    if core - set(G.nodes) or shell - set(G.nodes):
        raise DomainError("core/shell nodes missing from graph")
    dist = nx.multi_source_dijkstra_path_length(G, core)
    per = {v: dist[v] for v in sorted(shell) if v in dist}
    lost = len(shell) - len(per)
    mean = Fraction(sum(per.values()), len(per)) if per else None
    return CoreDistance(mean, len(per), lost, per)


def preferential_attachment(n: int, m0: int, links_per_arrival: int, seed: int) -> nx.Graph:
    """Degree-proportional growth from a complete seed graph on ``m0`` nodes."""
    if not m0 >= links_per_arrival >= 1:
        raise DomainError(f"need m0 >= links_per_arrival >= 1, got m0={m0}, m={links_per_arrival}")
    if n < m0:
        raise DomainError(f"n={n} is smaller than the seed clique m0={m0}")
    seed_graph = nx.complete_graph(m0)
    if n == m0:
        return seed_graph
    return nx.barabasi_albert_graph(n, links_per_arrival, seed=seed, initial_graph=seed_graph)


def read_node_set(path) -> frozenset[int]:
    """One node id per line; blank lines and ``#`` comments skipped."""
    out = set()
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                out.add(int(line))
            except ValueError:
                raise DomainError(f"{path}:{ln}: expected a node id") from None
    return frozenset(out)


METRIC_FIELDS = ("snapshot", "metric", "value_num", "value_den")


def metric_rows(snapshot, metrics: dict) -> list[tuple]:
    rows = []
    for name in sorted(metrics):
        v = Fraction(metrics[name])
        rows.append((snapshot, name, v.numerator, v.denominator))
    return rows


def write_metrics_csv(path, rows: Iterable[tuple], comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_FIELDS)
        w.writerows(rows)


def snapshot_metrics(g, core: Iterable | None = None, k: int | None = None) -> dict[str, Fraction]:
    """Density of ``core`` (if any), mean distance of the rest to it, and ``k``-core size."""
    G = as_graph(g)
    out: dict[str, Fraction] = {
        "nodes": Fraction(G.number_of_nodes()),
        "links": Fraction(G.number_of_edges()),
    }
    if core is not None:
        core = set(core)
        if len(core) >= 2:
            out["core_density"] = subgraph_density(G, core)
        shell = set(G.nodes) - core
        if shell and core:
            cd = mean_node_core_distance(G, core, shell)
            if cd.mean is not None:
                out["mean_core_distance"] = cd.mean
            out["unreachable_shell"] = Fraction(cd.unreachable)
    if k is not None:
        out[f"k{k}_core_size"] = Fraction(len(k_core(G, k)))
    return out
