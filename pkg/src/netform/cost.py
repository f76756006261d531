"""Exact player costs, link-change deltas, social cost and transfer-extended cost."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Mapping

from . import kernels
from .graph import Action, DomainError, PlayerType, Topology, canonical_pair, mutate_link

Rational = Fraction


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions, ``"p/q"`` strings and decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats only arrive from loosely typed config; go through repr to keep 0.1 == 1/10
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                return Fraction(text)
            return Fraction(Decimal(text))
        except (ValueError, ArithmeticError, ZeroDivisionError):
            raise DomainError(f"not a rational: {value!r}") from None
    raise DomainError(f"not a rational: {value!r}")


@dataclass(frozen=True)
class GameParams:
    c_A: Fraction
    c_B: Fraction
    A: Fraction

    def __post_init__(self) -> None:
        for name in ("c_A", "c_B", "A"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if not self.A > 1:
            raise DomainError(f"A must exceed 1, got {self.A}")
        if self.c_A > self.c_B:
            raise DomainError(f"c_A must not exceed c_B ({self.c_A} > {self.c_B})")
        if self.c_A < 0:
            raise DomainError("link costs must be non-negative")

    @property
    def c(self) -> Fraction:
        return (self.c_A + self.c_B) / 2

    def link_cost(self, t: PlayerType) -> Fraction:
        return self.c_A if t is PlayerType.A else self.c_B

    def scaled(self) -> tuple[int, int, int, int]:
        """Integer ``(c_A, c_B, A, unit)`` with every value multiplied by ``unit``."""
        unit = math.lcm(self.c_A.denominator, self.c_B.denominator, self.A.denominator)
        return (int(self.c_A * unit), int(self.c_B * unit), int(self.A * unit), unit)

    def in_main_regime(self) -> bool:
        return 1 < self.c_A < self.A and self.c_B < self.A


@dataclass(frozen=True, order=True)
class CostValue:
    """Lexicographic cost: more unreachable peers is worse regardless of the finite part.

    Differences of costs are CostValues too, with a possibly negative count.
    """

    unreachable_count: int = 0
    finite_part: Fraction = Fraction(0)

    def __add__(self, other: "CostValue") -> "CostValue":
        return CostValue(self.unreachable_count + other.unreachable_count, self.finite_part + other.finite_part)

    def __sub__(self, other: "CostValue") -> "CostValue":
        return CostValue(self.unreachable_count - other.unreachable_count, self.finite_part - other.finite_part)

    def __neg__(self) -> "CostValue":
        return CostValue(-self.unreachable_count, -self.finite_part)

    def sign(self) -> int:
        if self.unreachable_count:
            return 1 if self.unreachable_count > 0 else -1
        return (self.finite_part > 0) - (self.finite_part < 0)

    def is_negative(self) -> bool:
        return self.sign() < 0

    def is_positive(self) -> bool:
        return self.sign() > 0

    def is_zero(self) -> bool:
        return self.sign() == 0

    def shift(self, amount: Fraction) -> "CostValue":
        return CostValue(self.unreachable_count, self.finite_part + amount)

    def __repr__(self) -> str:
        if self.unreachable_count:
            return f"CostValue({self.unreachable_count} unreachable, {self.finite_part})"
        return f"CostValue({self.finite_part})"


ZERO = CostValue()


def _cost_from_sums(sums: tuple[int, int, int], deg: int, link: Fraction, params: GameParams) -> CostValue:
    sa, sb, unreach = sums
    return CostValue(unreach, deg * link + params.A * sa + sb)


def player_cost(topology: Topology, params: GameParams, i: int) -> CostValue:
    topology._check(i)
    sums = kernels.dist_sums(topology.adj, topology.n, i, topology.a_mask)
    return _cost_from_sums(sums, topology.degree(i), params.link_cost(topology.types[i]), params)


def all_costs(topology: Topology, params: GameParams) -> list[CostValue]:
    sums = kernels.all_dist_sums(topology.adj, topology.n, topology.a_mask)
    return [
        _cost_from_sums(s, topology.adj[i].bit_count(), params.link_cost(topology.types[i]), params)
        for i, s in enumerate(sums)
    ]


def _check_action(topology: Topology, pair: tuple[int, int], action: Action) -> tuple[int, int]:
    u, v = canonical_pair(*pair)
    topology._check(u)
    topology._check(v)
    present = (u, v) in topology.links
    if action is Action.ADD and present:
        raise DomainError(f"link {(u, v)} already present")
    if action is Action.REMOVE and not present:
        raise DomainError(f"link {(u, v)} not present")
    return u, v


def delta_cost(topology: Topology, params: GameParams, i: int, pair: tuple[int, int], action: Action) -> CostValue:
    """``C(i)`` after the change minus ``C(i)`` before it."""
    _check_action(topology, pair, action)
    topology._check(i)
    after = mutate_link(topology, pair, action)
    return player_cost(after, params, i) - player_cost(topology, params, i)


def pair_deltas(topology: Topology, params: GameParams, pair: tuple[int, int]) -> tuple[CostValue, CostValue]:
    """Deltas of both endpoints for toggling ``pair`` (add if absent, remove if present)."""
    u, v = canonical_pair(*pair)
    topology._check(u)
    topology._check(v)
    action = Action.REMOVE if (u, v) in topology.links else Action.ADD
    after = mutate_link(topology, (u, v), action)
    return (
        player_cost(after, params, u) - player_cost(topology, params, u),
        player_cost(after, params, v) - player_cost(topology, params, v),
    )


def toggle_deltas(topology: Topology, params: GameParams, i: int) -> tuple[list[CostValue | None], list[CostValue | None]]:
    """For every ``j``: delta of ``i`` and of ``j`` when link ``(i, j)`` is toggled.

    One kernel call covers all partners; entry ``i`` is ``None``.
    """
    n, adj = topology.n, topology.adj
    own, other = kernels.toggle_sums(adj, n, i, topology.a_mask)
    types = topology.types
    base = all_costs(topology, params) if n else []
    ci = params.link_cost(types[i])
    deg_i = adj[i].bit_count()
    mine: list[CostValue | None] = [None] * n
    theirs: list[CostValue | None] = [None] * n
    for j in range(n):
        if j == i:
            continue
        step = -1 if adj[i] >> j & 1 else 1
        mine[j] = _cost_from_sums(own[j], deg_i + step, ci, params) - base[i]
        theirs[j] = _cost_from_sums(other[j], adj[j].bit_count() + step, params.link_cost(types[j]), params) - base[j]
    return mine, theirs


def social_cost(topology: Topology, params: GameParams) -> CostValue:
    total = ZERO
    for cv in all_costs(topology, params):
        total = total + cv
    return total


@dataclass(frozen=True)
class PaymentLedger:
    """Transfers ``P[(payer, payee)]`` on existing links plus asking prices ``w``."""

    transfers: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    asks: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        norm = {}
        for (a, b), p in self.transfers.items():
            p = to_fraction(p)
            if p < 0:
                raise DomainError(f"negative transfer {p} on {(a, b)}")
            if a == b:
                raise DomainError("self transfer")
            norm[(a, b)] = p
        object.__setattr__(self, "transfers", dict(sorted(norm.items())))
        object.__setattr__(self, "asks", {k: to_fraction(v) for k, v in sorted(self.asks.items())})

    def check(self, topology: Topology) -> None:
        for a, b in self.transfers:
            if canonical_pair(a, b) not in topology.links:
                raise DomainError(f"transfer on missing link {(a, b)}")

    def net_outflow(self, i: int) -> Fraction:
        out = Fraction(0)
        for (a, b), p in self.transfers.items():
            if a == i:
                out += p
            elif b == i:
                out -= p
        return out

    def link_payment(self, u: int, v: int) -> Fraction:
        return self.transfers.get((u, v), Fraction(0)) + self.transfers.get((v, u), Fraction(0))

    def with_payment(self, payer: int, payee: int, amount: Fraction) -> "PaymentLedger":
        t = dict(self.transfers)
        t[(payer, payee)] = t.get((payer, payee), Fraction(0)) + amount
        return PaymentLedger(t, self.asks)

    def without_link(self, u: int, v: int) -> "PaymentLedger":
        t = {k: p for k, p in self.transfers.items() if canonical_pair(*k) != canonical_pair(u, v)}
        return PaymentLedger(t, self.asks)

    def balance(self) -> Fraction:
        return sum((self.net_outflow(i) for i in {x for k in self.transfers for x in k}), Fraction(0))


def extended_cost(topology: Topology, params: GameParams, ledger: PaymentLedger, i: int) -> CostValue:
    ledger.check(topology)
    return player_cost(topology, params, i).shift(ledger.net_outflow(i))
