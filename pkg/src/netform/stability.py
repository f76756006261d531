"""Pairwise stability with and without transfers, plus small-instance enumeration.

Deltas are always ``after - before``.  A present link is dropped when some
endpoint's removal delta is negative; an absent link forms when both
endpoints' addition deltas are negative.  With transfers the test is on the
sum of the two deltas.  A delta of exactly zero never triggers a change.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from . import kernels
from .cost import CostValue, GameParams, pair_deltas, social_cost
from .graph import DomainError, Topology, all_pairs, player_types

MAX_STABLE_PLAYERS = 7


class DeviationKind(enum.Enum):
    UNILATERAL_REMOVAL = "UnilateralRemoval"
    BILATERAL_ADDITION = "BilateralAddition"


@dataclass(frozen=True)
class DeviationWitness:
    kind: DeviationKind
    pair: tuple[int, int]
    deltas: tuple[CostValue, CostValue]
    actor: int | None = None  # the profiting endpoint for a one-sided removal


class StabilityResult(NamedTuple):
    stable: bool
    witness: DeviationWitness | None


def _require_connected(topology: Topology) -> None:
    if not topology.is_connected():
        raise DomainError("stability is only defined for connected topologies")


def _scan(topology: Topology, params: GameParams, transfers: bool) -> DeviationWitness | None:
    present = topology.sorted_links()
    absent = [p for p in all_pairs(topology.n) if p not in topology.links]
    # removals first, then additions, each in canonical pair order
    for u, v in present:
        du, dv = pair_deltas(topology, params, (u, v))
        if transfers:
            if (du + dv).is_negative():
                return DeviationWitness(DeviationKind.UNILATERAL_REMOVAL, (u, v), (du, dv))
        elif du.is_negative() or dv.is_negative():
            actor = u if du.is_negative() else v
            return DeviationWitness(DeviationKind.UNILATERAL_REMOVAL, (u, v), (du, dv), actor)
    for u, v in absent:
        du, dv = pair_deltas(topology, params, (u, v))
        if transfers:
            if (du + dv).is_negative():
                return DeviationWitness(DeviationKind.BILATERAL_ADDITION, (u, v), (du, dv))
        elif du.is_negative() and dv.is_negative():
            return DeviationWitness(DeviationKind.BILATERAL_ADDITION, (u, v), (du, dv))
    return None


def is_pairwise_stable(topology: Topology, params: GameParams) -> StabilityResult:
    _require_connected(topology)
    w = _scan(topology, params, transfers=False)
    return StabilityResult(w is None, w)


def is_stable_with_transfers(topology: Topology, params: GameParams) -> StabilityResult:
    _require_connected(topology)
    w = _scan(topology, params, transfers=True)
    return StabilityResult(w is None, w)


def witness_holds(topology: Topology, params: GameParams, witness: DeviationWitness, transfers: bool) -> bool:
    """Replay a witness through ``pair_deltas`` and confirm it is strictly profitable."""
    du, dv = pair_deltas(topology, params, witness.pair)
    if (du, dv) != witness.deltas:
        return False
    if transfers:
        return (du + dv).is_negative()
    if witness.kind is DeviationKind.UNILATERAL_REMOVAL:
        return du.is_negative() or dv.is_negative()
    return du.is_negative() and dv.is_negative()


@dataclass(frozen=True)
class StableEntry:
    topology: Topology
    social_cost: Fraction
    knife_edge: bool  # some deciding delta was exactly zero


@dataclass(frozen=True)
class EnumerationReport:
    n_A: int
    n_B: int
    params: GameParams
    transfers: bool
    connected_count: int
    stable: list[StableEntry]
    optimum_cost: Fraction | None
    optimal: list[Topology] = field(default_factory=list)

    @property
    def stable_set(self) -> set[Topology]:
        return {e.topology for e in self.stable}

    @property
    def min_stable_cost(self) -> Fraction | None:
        return min((e.social_cost for e in self.stable), default=None)

    @property
    def max_stable_cost(self) -> Fraction | None:
        return max((e.social_cost for e in self.stable), default=None)

    @property
    def price_of_stability(self) -> Fraction | None:
        if not self.stable or not self.optimum_cost:
            return None
        return self.min_stable_cost / self.optimum_cost

    @property
    def price_of_anarchy(self) -> Fraction | None:
        if not self.stable or not self.optimum_cost:
            return None
        return self.max_stable_cost / self.optimum_cost

    @property
    def knife_edge_count(self) -> int:
        return sum(e.knife_edge for e in self.stable)


def _mask_topology(types, pairs, mask: int) -> Topology:
    return Topology(types, frozenset(p for e, p in enumerate(pairs) if mask >> e & 1))


def enumerate_stable(n_A: int, n_B: int, params: GameParams, transfers: bool = False) -> EnumerationReport:
    n = n_A + n_B
    if n_A < 0 or n_B < 0:
        raise DomainError("negative player count")
    if n > MAX_STABLE_PLAYERS:
        raise DomainError(f"stable-set enumeration is limited to {MAX_STABLE_PLAYERS} players, got {n}")
    types = player_types(n_A, n_B)
    pairs = all_pairs(n)
    a_mask = (1 << n_A) - 1
    cA, cB, A, unit = params.scaled()
    want = kernels.TRANSFER if transfers else kernels.BASIC
    edge_bit = kernels.TRANSFER_EDGE if transfers else kernels.BASIC_EDGE
    n_conn, opt, opt_masks, records = kernels.scan_graphs(n, a_mask, cA, cB, A, unit, want)
    stable = [
        StableEntry(_mask_topology(types, pairs, mask), Fraction(cost, unit), bool(flags & edge_bit))
        for mask, cost, flags in records
        if flags & want
    ]
    return EnumerationReport(
        n_A,
        n_B,
        params,
        transfers,
        n_conn,
        stable,
        None if opt is None else Fraction(opt, unit),
        [_mask_topology(types, pairs, m) for m in opt_masks],
    )


def _enum_job(args):
    n_A, n_B, params, transfers = args
    return enumerate_stable(n_A, n_B, params, transfers)


def enumerate_many(jobs: list[tuple[int, int, GameParams, bool]], workers: int = 1) -> list[EnumerationReport]:
    """Run several enumerations, optionally across processes (order preserved)."""
    if workers <= 1 or len(jobs) <= 1:
        return [_enum_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_enum_job, jobs))


def check_social_cost(entry: StableEntry, params: GameParams) -> bool:
    """Cross-check an enumerated cost against the per-player summation."""
    sc = social_cost(entry.topology, params)
    return sc.unreachable_count == 0 and sc.finite_part == entry.social_cost
