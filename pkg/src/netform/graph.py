"""Typed undirected player graphs with exact hop distances.

Node ids are dense integers ``0..n-1`` assigned in arrival order, so an id
doubles as the player's arrival rank.  Adjacency is kept as one int bitmask
per node, which is what the distance kernels consume.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property

from . import kernels


class DomainError(ValueError):
    """Raised when an operation's precondition is violated."""


class PlayerType(enum.IntEnum):
    A = 0
    B = 1

    @classmethod
    def parse(cls, text: str) -> "PlayerType":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise DomainError(f"unknown player type {text!r}") from None


class Action(enum.Enum):
    ADD = "add"
    REMOVE = "remove"


class _Unreachable:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()


def canonical_pair(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise DomainError(f"self-loop ({u},{v})")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class DistanceTable:
    source: int
    hops: Mapping[int, int | _Unreachable]

    def __getitem__(self, node: int) -> int | _Unreachable:
        return self.hops[node]


@dataclass(frozen=True)
class Topology:
    types: tuple[PlayerType, ...]
    links: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        n = len(self.types)
        object.__setattr__(self, "types", tuple(PlayerType(t) for t in self.types))
        norm = set()
        for u, v in self.links:
            p = canonical_pair(u, v)
            if not (0 <= p[0] and p[1] < n):
                raise DomainError(f"link {p} has an endpoint outside 0..{n - 1}")
            norm.add(p)
        object.__setattr__(self, "links", frozenset(norm))

    @classmethod
    def from_edges(cls, types: Iterable[PlayerType | str], edges: Iterable[tuple[int, int]] = ()) -> "Topology":
        ts = tuple(PlayerType.parse(t) if isinstance(t, str) else PlayerType(t) for t in types)
        return cls(ts, frozenset(edges))

    @classmethod
    def from_masks(cls, types: tuple[PlayerType, ...], adj: Iterable[int]) -> "Topology":
        links = set()
        for u, row in enumerate(adj):
            row >>= u + 1
            v = u + 1
            while row:
                if row & 1:
                    links.add((u, v))
                row >>= 1
                v += 1
        return cls(types, frozenset(links))

    @property
    def n(self) -> int:
        return len(self.types)

    @cached_property
    def adj(self) -> tuple[int, ...]:
        rows = [0] * self.n
        for u, v in self.links:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return tuple(rows)

    @cached_property
    def a_mask(self) -> int:
        m = 0
        for i, t in enumerate(self.types):
            if t is PlayerType.A:
                m |= 1 << i
        return m

    @property
    def type_a(self) -> list[int]:
        return [i for i, t in enumerate(self.types) if t is PlayerType.A]

    @property
    def type_b(self) -> list[int]:
        return [i for i, t in enumerate(self.types) if t is PlayerType.B]

    def has_link(self, u: int, v: int) -> bool:
        return canonical_pair(u, v) in self.links

    def neighbors(self, i: int) -> list[int]:
        self._check(i)
        row, out = self.adj[i], []
        while row:
            low = row & -row
            out.append(low.bit_length() - 1)
            row ^= low
        return out

    def degree(self, i: int) -> int:
        self._check(i)
        return self.adj[i].bit_count()

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return kernels.dist_sums(self.adj, self.n, 0, self.a_mask)[2] == 0

    def sorted_links(self) -> list[tuple[int, int]]:
        return sorted(self.links)

    def with_player(self, t: PlayerType) -> "Topology":
        return Topology(self.types + (PlayerType(t),), self.links)

    def _check(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise DomainError(f"unknown player {i}")


def shortest_distances(topology: Topology, source: int) -> DistanceTable:
    topology._check(source)
    dist = kernels.bfs_hops(topology.adj, topology.n, source)
    hops = {v: (UNREACHABLE if d < 0 else d) for v, d in enumerate(dist)}
    return DistanceTable(source, hops)


def mutate_link(topology: Topology, pair: tuple[int, int], action: Action) -> Topology:
    u, v = canonical_pair(*pair)
    topology._check(u)
    topology._check(v)
    present = (u, v) in topology.links
    if action is Action.ADD:
        if present:
            raise DomainError(f"link {(u, v)} already present")
        return Topology(topology.types, topology.links | {(u, v)})
    if not present:
        raise DomainError(f"link {(u, v)} not present")
    return Topology(topology.types, topology.links - {(u, v)})


MAX_ENUM_PLAYERS = 8


def player_types(n_A: int, n_B: int) -> tuple[PlayerType, ...]:
    """Type-A players take the low ids, type-B the rest."""
    return (PlayerType.A,) * n_A + (PlayerType.B,) * n_B


def all_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def enumerate_labeled_graphs(n_A: int, n_B: int, connected_only: bool = False) -> Iterator[Topology]:
    n = n_A + n_B
    if n_A < 0 or n_B < 0:
        raise DomainError("negative player count")
    if n > MAX_ENUM_PLAYERS:
        raise DomainError(f"enumeration is limited to {MAX_ENUM_PLAYERS} players, got {n}")
    types = player_types(n_A, n_B)
    pairs = all_pairs(n)
    for mask in range(1 << len(pairs)):
        links = frozenset(p for e, p in enumerate(pairs) if mask >> e & 1)
        top = Topology(types, links)
        if connected_only and not top.is_connected():
            continue
        yield top


def read_edge_list(path, types_path=None) -> Topology:
    """Read ``u v`` lines (``#`` comments allowed) and an optional ``u t`` type file.

    Without a type file every node is type B.  Node ids must be dense.
    """
    edges = []
    nodes: set[int] = set()
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{ln}: expected 'u v'")
            u, v = (int(x) for x in parts)
            if u < 0 or v < 0:
                raise DomainError(f"{path}:{ln}: negative node id")
            edges.append((u, v))
            nodes.update((u, v))
    typemap: dict[int, PlayerType] = {}
    if types_path is not None:
        with open(types_path) as fh:
            for ln, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise DomainError(f"{types_path}:{ln}: expected 'u t'")
                typemap[int(parts[0])] = PlayerType.parse(parts[1])
        nodes.update(typemap)
    n = max(nodes) + 1 if nodes else 0
    types = tuple(typemap.get(i, PlayerType.B) for i in range(n))
    return Topology(types, frozenset(edges))


def write_edge_list(topology: Topology, path, types_path=None, header: str | None = None) -> None:
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for u, v in topology.sorted_links():
            fh.write(f"{u} {v}\n")
    if types_path is not None:
        with open(types_path, "w") as fh:
            for i, t in enumerate(topology.types):
                fh.write(f"{i} {t.name}\n")
