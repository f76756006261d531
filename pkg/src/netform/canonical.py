"""Named topologies, their closed-form social costs, price ratios and distance bounds.

Irrational bounds are held as :class:`Surd` values and compared exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

from .cost import GameParams, social_cost
from .graph import DomainError, Topology, player_types
from .stability import enumerate_stable

F = Fraction


@dataclass(frozen=True)
class StarOnClique:
    pass


@dataclass(frozen=True)
class FullBipartiteOnClique:
    pass


@dataclass(frozen=True)
class LinesOnClique:
    m: int
    k: int


@dataclass(frozen=True)
class LoopExample:
    k: int


@dataclass(frozen=True)
class FullClique:
    pass


CanonicalKind = Union[StarOnClique, FullBipartiteOnClique, LinesOnClique, LoopExample, FullClique]


def _clique_links(n_A: int) -> set[tuple[int, int]]:
    return {(a, b) for a in range(n_A) for b in range(a + 1, n_A)}


def build(kind: CanonicalKind, n_A: int, n_B: int) -> Topology:
    """Type-A players get ids ``0..n_A-1``, type-B players follow."""
    if n_A < 0 or n_B < 0:
        raise DomainError("negative player count")
    types = player_types(n_A, n_B)
    bs = range(n_A, n_A + n_B)
    links = _clique_links(n_A)
    if isinstance(kind, FullClique):
        n = n_A + n_B
        links = {(u, v) for u in range(n) for v in range(u + 1, n)}
    elif isinstance(kind, StarOnClique):
        if n_B and not n_A:
            raise DomainError("StarOnClique needs a type-A node")
        links |= {(0, b) for b in bs}
    elif isinstance(kind, FullBipartiteOnClique):
        if n_B and not n_A:
            raise DomainError("FullBipartiteOnClique needs a type-A node")
        links |= {(a, b) for a in range(n_A) for b in bs}
    elif isinstance(kind, LinesOnClique):
        if kind.m < 1 or kind.k < 1 or kind.m * kind.k != n_B or n_A < 1:
            raise DomainError(f"LinesOnClique needs n_B = m*k and n_A >= 1 (m={kind.m}, k={kind.k}, n_B={n_B})")
        for line in range(kind.m):
            prev = 0
            for step in range(kind.k):
                node = n_A + line * kind.k + step
                links.add((prev, node))
                prev = node
    elif isinstance(kind, LoopExample):
        if kind.k < 1 or n_B != kind.k or n_A < 2:
            raise DomainError(f"LoopExample needs n_B = k and n_A >= 2 (k={kind.k}, n_B={n_B}, n_A={n_A})")
        path = list(bs)
        links |= {(path[i], path[i + 1]) for i in range(len(path) - 1)}
        links |= {(0, path[0]), (1, path[-1])}
    else:
        raise DomainError(f"unknown kind {kind!r}")
    return Topology(types, frozenset(links))


def loop_feasible(k: int, params: GameParams) -> bool:
    """``(k+1)^2 < 8c < 4(k+1)^2``."""
    c8 = 8 * params.c
    return (k + 1) ** 2 < c8 < 4 * (k + 1) ** 2


def _clique_term(n_A: int, params: GameParams) -> Fraction:
    return n_A * (n_A - 1) * (params.c_A + params.A)


def closed_form_cost(kind: CanonicalKind, n_A: int, n_B: int, params: GameParams) -> Fraction:
    c, A, cA, cB = params.c, params.A, params.c_A, params.c_B
    tb = n_B
    if isinstance(kind, StarOnClique):
        return 2 * tb * (tb - 1 + c + (A + 1) * (n_A - F(1, 2))) + _clique_term(n_A, params)
    if isinstance(kind, FullBipartiteOnClique):
        return 2 * tb * (tb - 1 + ((A + 1) / 2 + c) * n_A) + _clique_term(n_A, params)
    if isinstance(kind, LinesOnClique):
        m, k = kind.m, kind.k
        if m * k != n_B:
            raise DomainError("LinesOnClique needs n_B = m*k")
        links = m * (cA + (2 * k - 1) * cB)
        to_root = k * (k + 1) // 2
        to_clique = (A + 1) * m * (to_root + (n_A - 1) * (to_root + k))
        within = m * F(k * (k * k - 1), 3)
        across = m * (m - 1) * k * k * (k + 1)
        return _clique_term(n_A, params) + links + to_clique + within + across
    raise DomainError(f"no closed form for {kind!r}")


def lines_cost_as_printed(n_A: int, n_B: int, k: int, params: GameParams) -> Fraction:
    """The poor-equilibrium cost expression exactly as originally printed.

    Kept for comparison only; it does not match the social cost of the
    built topology (see :func:`closed_form_cost`).
    """
    ta, tb, A, cA, cB = n_A, n_B, params.A, params.c_A, params.c_B
    m = F(tb, k)
    return (
        ta * (ta - 1) * (cA / 2 + A)
        + 2 * cB * tb
        + (A + 1) * tb * (ta - 1) * F(k + 3, 2)
        + tb * ((A + 1) * F(k + 1, 2) + 2 * k - 4)
        + 2 * tb * tb * (k + 2) ** 2
        - 2 * m
    )


def poor_eq_line_length(params: GameParams) -> int:
    """``min(floor(sqrt(3 c_A)), floor(sqrt(4 c_B / 5)))``."""
    return min(_isqrt_floor(3 * params.c_A), _isqrt_floor(4 * params.c_B / 5))


def _isqrt_floor(x: Fraction) -> int:
    """floor(sqrt(x)) for a non-negative rational."""
    return math.isqrt(math.floor(x))


def absorbed_star_cost(n_A: int, n_B: int, params: GameParams) -> Fraction:
    """Social cost when every type-A player links to one type-B hub holding all other B's.

    Terms: clique, star links, A-to-hub links (both sides), clique-hub
    distances, hub-leaf distances, clique-leaf distances, leaf-leaf distances.
    """
    ta, tb, A = n_A, n_B, params.A
    return (
        _clique_term(ta, params)
        + 2 * params.c_B * (tb - 1)
        + (params.c_A + params.c_B) * ta
        + (A + 1) * ta
        + 2 * (tb - 1)
        + 2 * (A + 1) * ta * (tb - 1)
        + 2 * (tb - 2) * (tb - 1)
    )


def absorbed_star_cost_as_printed(n_A: int, n_B: int, params: GameParams) -> Fraction:
    ta, tb, A = n_A, n_B, params.A
    return (
        _clique_term(ta, params)
        + 2 * params.c_B * tb
        + (A + 1) * ta
        + 2 * (tb - 1)
        + 2 * (tb - 1) * (A + 1)
        + 2 * (tb - 2) * (tb - 1)
        + (params.c_B + params.c_A) * ta / 2
    )


def convergence_cost_bound(n_A: int, n_B: int, params: GameParams, form: str = "body") -> Fraction:
    """Upper bound on the final social cost under grand-plan dynamics.

    ``form`` selects between the three published algebraic forms:
    ``"body"`` (the proof's summary inequality), ``"statement"`` and
    ``"appendix"``.
    """
    ta, tb, A, c = n_A, n_B, params.A, params.c
    if form == "body":
        return ta * (ta - 1) * (c + A) + 2 * params.c_B * tb + (A + 1) * (3 * ta * tb + tb) + 2 * (tb - 1) ** 2
    if form == "statement":
        return ta * (ta - 1) * (c + A) + 2 * params.c_B * tb + (A + 1) * (3 * ta * tb - ta + tb) + 2 * (tb - 1) ** 2
    if form == "appendix":
        cA = params.c_A
        return (
            ta * ta * (cA + A) - ta * (2 * A + cA / 2) + 2 * tb * tb + tb * (A + 2 * params.c_B) + 3 * ta * tb * (A + 1) + 2
        )
    raise DomainError(f"unknown bound form {form!r}")


def single_act_cost_bound(n_A: int, n_B: int, params: GameParams) -> Fraction:
    """Final-cost bound when every act must pay off on its own."""
    ta, tb, A = n_A, n_B, params.A
    return _clique_term(ta, params) + 3 * tb * tb + 2 * params.c_B * tb + 2 * ta * tb * (A + 1)


def worst_stable_cost_bound(n_A: int, n_B: int, params: GameParams) -> Fraction:
    ta, tb = n_A, n_B
    return (
        ta * ta * (params.c_A + params.A)
        + tb * tb * (params.c_B + _isqrt_floor(4 * params.c_B))
        + (params.A + 1) * _isqrt_floor(4 * params.c) * ta * tb
    )


def shortcut_gain(k: int) -> Fraction:
    """Distance-sum drop at a path endpoint when a ``k``-node path is closed into a cycle."""
    if k < 2:
        raise DomainError("shortcut_gain needs k >= 2")
    return F(k * (k - 2) + k % 2, 4)


def optimal_cost(n_A: int, n_B: int, params: GameParams) -> Fraction:
    """The cheaper of the two optimal candidates (star when ``(A+1)/2 <= c``)."""
    star = closed_form_cost(StarOnClique(), n_A, n_B, params)
    fb = closed_form_cost(FullBipartiteOnClique(), n_A, n_B, params)
    return min(star, fb)


class Prices(NamedTuple):
    pos: Fraction | None
    poa_lower: Fraction | None


def stability_prices(n_A: int, n_B: int, params: GameParams, transfers: bool = False, mode: str = "enumerate") -> Prices:
    """Price of stability and a lower bound on the price of anarchy.

    ``mode="enumerate"`` computes both exactly from the stable set (small
    instances only).  ``mode="closed_form"`` uses the star / full-bipartite
    optimum and the lines-on-clique equilibrium with the standard line length.
    """
    if mode == "enumerate":
        rep = enumerate_stable(n_A, n_B, params, transfers)
        return Prices(rep.price_of_stability, rep.price_of_anarchy)
    if mode != "closed_form":
        raise DomainError(f"unknown mode {mode!r}")
    opt = optimal_cost(n_A, n_B, params)
    star = closed_form_cost(StarOnClique(), n_A, n_B, params)
    pos = F(1) if transfers else star / opt
    k = poor_eq_line_length(params)
    if k < 1 or n_B % k:
        return Prices(pos, None)
    poor = closed_form_cost(LinesOnClique(n_B // k, k), n_A, n_B, params)
    return Prices(pos, poor / opt)


def pos_asymptotic(n_A: int, n_B: int, params: GameParams) -> Fraction:
    """Large-network price of stability (linear terms dropped)."""
    if (params.A + 1) / 2 <= params.c:
        return F(1)
    ta, tb, A = n_A, n_B, params.A
    num = 2 * tb * (tb + (A + 1) * ta) + ta * ta * (params.c_A + A)
    den = 2 * tb * (tb + ((A + 1) / 2 + params.c) * ta) + ta * ta * (params.c_A + A)
    return num / den


@dataclass(frozen=True)
class Surd:
    """The real number ``sqrt(radicand) + offset`` with rational parts."""

    radicand: Fraction
    offset: Fraction = F(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "radicand", F(self.radicand))
        object.__setattr__(self, "offset", F(self.offset))
        if self.radicand < 0:
            raise DomainError("negative radicand")

    def ge(self, x) -> bool:
        """``self >= x`` exactly."""
        t = F(x) - self.offset
        return t <= 0 or self.radicand >= t * t

    def gt(self, x) -> bool:
        t = F(x) - self.offset
        return t < 0 or self.radicand > t * t

    def admits(self, d: int) -> bool:
        """Whether a distance ``d`` satisfies ``d <= self``."""
        return self.ge(d)

    def floor(self) -> int:
        k = math.isqrt(math.floor(self.radicand)) + math.floor(self.offset) - 1
        while self.ge(k + 1):
            k += 1
        while not self.ge(k):
            k -= 1
        return k

    def __float__(self) -> float:
        return math.sqrt(self.radicand) + float(self.offset)


class DistanceBounds(NamedTuple):
    b_any: int
    a_a: Surd
    money_b_b: int | None
    money_b_clique: int | None


def distance_bounds(params: GameParams, transfers: bool = False, n_A: int = 0) -> DistanceBounds:
    A = params.A
    b_any = Surd(4 * params.c_B).floor()
    a_a = Surd((1 - 2 * A) ** 2 + 4 * params.c_A, -2 * (A - 1))
    money_bb = money_bc = None
    if transfers:
        money_bb = max(Surd(4 * params.c).floor(), 1)
        if n_A > 0:
            an = A * n_A
            money_bc = max(Surd(an * an + 4 * params.c * A * n_A, -an).floor(), 2)
    return DistanceBounds(b_any, a_a, money_bb, money_bc)


class BoundCheck(NamedTuple):
    ok: bool
    violations: list[str]


def check_distance_bounds(topology: Topology, params: GameParams, transfers: bool = False) -> BoundCheck:
    """Check every pairwise hop distance of ``topology`` against :func:`distance_bounds`."""
    from . import kernels

    n_A = len(topology.type_a)
    bounds = distance_bounds(params, transfers, n_A)
    bad: list[str] = []
    is_a = [t.name == "A" for t in topology.types]
    for s in range(topology.n):
        hops = kernels.bfs_hops(topology.adj, topology.n, s)
        for v in range(topology.n):
            if v == s:
                continue
            d = hops[v]
            if d < 0:
                bad.append(f"{s}-{v} unreachable")
                continue
            if not is_a[v] and d > bounds.b_any:
                bad.append(f"d({s},{v})={d} > {bounds.b_any} (any to B)")
            if is_a[s] and is_a[v] and s < v:
                if not bounds.a_a.admits(d):
                    bad.append(f"d({s},{v})={d} exceeds A-A bound")
                if params.c_A < params.A and d != 1:
                    bad.append(f"A-A pair ({s},{v}) not linked although c_A < A")
            if transfers and not is_a[s] and not is_a[v] and s < v and d > bounds.money_b_b:
                bad.append(f"d({s},{v})={d} > {bounds.money_b_b} (B-B with transfers)")
        if transfers and not is_a[s] and bounds.money_b_clique is not None:
            dc = min(hops[a] for a in range(topology.n) if is_a[a])
            if dc > bounds.money_b_clique:
                bad.append(f"B node {s} at {dc} from the clique > {bounds.money_b_clique}")
    return BoundCheck(not bad, bad)


def check_built_cost(kind: CanonicalKind, n_A: int, n_B: int, params: GameParams) -> bool:
    sc = social_cost(build(kind, n_A, n_B), params)
    return sc.unreachable_count == 0 and sc.finite_part == closed_form_cost(kind, n_A, n_B, params)


def label_topology(topology: Topology) -> str:
    """Structural name of a topology, independent of node ids.

    One of ``K<n>``, ``StarOnClique``, ``FullBipartiteOnClique``,
    ``AbsorbedStar`` or ``Other``.
    """
    n, adj, a_mask = topology.n, topology.adj, topology.a_mask
    full = (1 << n) - 1
    if n and all(adj[i] | (1 << i) == full for i in range(n)):
        return f"K{n}"
    A, B = topology.type_a, topology.type_b
    if not A or any((adj[a] & a_mask) | (1 << a) != a_mask for a in A):
        return "Other"
    b_mask = full & ~a_mask
    if all(adj[b] == a_mask for b in B):
        return "FullBipartiteOnClique"
    hubs = {adj[b] for b in B}
    if len(hubs) == 1:
        (h,) = hubs
        if h.bit_count() == 1 and h & a_mask:
            return "StarOnClique"
    for x in B:
        rest = b_mask & ~(1 << x)
        if adj[x] == a_mask | rest and all(adj[b] == 1 << x for b in B if b != x):
            return "AbsorbedStar"
    return "Other"
