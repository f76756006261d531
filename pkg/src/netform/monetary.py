"""Transfer-aware link negotiation.

A link forms under transfers when the two endpoints' summed delta is
negative and is dropped when the summed removal delta is negative.  Who
pays whom is decided by a preference order:

* ``PrefOrder1``: the initiator ranks partners by its own delta plus the
  partner's gain (if any).  Whichever side loses from the link is
  compensated exactly by the other.
* ``PrefOrder2``: prices follow the strategic mechanism in which the least
  useful acceptable link sets the base price and better links are charged
  their extra value; the initiator takes the cheapest of the equally good
  options, remaining ties drawn from a seeded rng.

Internally deltas are ``(unreachable, scaled)`` integer pairs compared
lexicographically, where ``scaled`` is the cost times the params' common
denominator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cost import CostValue, GameParams, pair_deltas, toggle_deltas
from .graph import Action, DomainError, Topology, canonical_pair

ZERO2 = (0, 0)


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _pos(a):
    return a if a > ZERO2 else ZERO2


@dataclass(frozen=True)
class LinkQuote:
    pair: tuple[int, int]  # (initiator, partner)
    price: Fraction  # paid by ``payer``
    buyer_delta: CostValue
    seller_delta: CostValue
    effective_delta: CostValue
    payer: int | None = None

    @property
    def payee(self) -> int | None:
        if self.payer is None:
            return None
        a, b = self.pair
        return b if self.payer == a else a


@dataclass(frozen=True)
class _Choice:
    j: int
    price: int  # scaled, non-negative
    payer: int | None  # None when no money changes hands
    score: tuple[int, int]  # initiator's effective delta


def choose_free(i: int, cands) -> _Choice | None:
    """Best partner by the initiator's own delta, no payment (disconnected initiator)."""
    best = None
    for j, di, dj in cands:
        if dj < ZERO2 and di < ZERO2 and (best is None or di < best[0]):
            best = (di, j)
    if best is None:
        return None
    return _Choice(best[1], 0, None, best[0])


def choose_pref1(i: int, cands) -> _Choice | None:
    best = None
    for j, di, dj in cands:
        if not _add(di, dj) < ZERO2:
            continue
        score = _add(di, min(dj, ZERO2))
        if best is None or score < best[0]:
            best = (score, j, di, dj)
    if best is None or not best[0] < ZERO2:
        return None
    score, j, di, dj = best
    if dj > ZERO2:
        return _Choice(j, dj[1], i, _add(di, dj))
    if di > ZERO2:
        return _Choice(j, di[1], j, ZERO2)
    return _Choice(j, 0, None, di)


def choose_pref2(i: int, cands, rng: random.Random) -> _Choice | None:
    pool = [(j, di, dj) for j, di, dj in cands if _add(di, _pos(dj)) < ZERO2]
    if not pool:
        return None
    # least useful acceptable link sets the base price
    jstar, dstar, djstar = max(pool, key=lambda c: (c[1], -c[0]))
    pstar = _pos(djstar)
    base = _add(dstar, pstar)
    options = []
    for j, di, dj in pool:
        alpha = _sub(base, di)
        price = max(ZERO2, alpha, dj)
        eff = _add(di, price)
        if eff < ZERO2:
            options.append((eff, price, j))
    if not options:
        return None
    best_eff = min(o[0] for o in options)
    tied = [o for o in options if o[0] == best_eff]
    best_price = min(o[1] for o in tied)
    tied = sorted(o[2] for o in tied if o[1] == best_price)
    j = tied[0] if len(tied) == 1 else rng.choice(tied)
    assert best_price[0] == 0, "prices are finite once the initiator is connected"
    price = best_price[1]
    return _Choice(j, price, i if price else None, best_eff)


def transfer_feasible(topology: Topology, params: GameParams, pair: tuple[int, int], action: Action) -> tuple[bool, CostValue]:
    u, v = canonical_pair(*pair)
    present = (u, v) in topology.links
    if action is Action.ADD and present:
        raise DomainError(f"link {(u, v)} already present")
    if action is Action.REMOVE and not present:
        raise DomainError(f"link {(u, v)} not present")
    du, dv = pair_deltas(topology, params, (u, v))
    total = du + dv
    return total.is_negative(), total


def _candidates(topology: Topology, params: GameParams, i: int):
    mine, theirs = toggle_deltas(topology, params, i)
    unit = params.scaled()[3]
    out = []
    for j in range(topology.n):
        if j == i or topology.adj[i] >> j & 1:
            continue
        di, dj = mine[j], theirs[j]
        out.append((j, _to2(di, unit), _to2(dj, unit)))
    return out, mine, theirs, unit


def _to2(cv: CostValue, unit: int) -> tuple[int, int]:
    s = cv.finite_part * unit
    assert s.denominator == 1
    return (cv.unreachable_count, int(s))


def _quote(i: int, ch: _Choice | None, mine, theirs, unit: int) -> LinkQuote | None:
    if ch is None:
        return None
    price = Fraction(ch.price, unit)
    di, dj = mine[ch.j], theirs[ch.j]
    eff = di.shift(price if ch.payer == i else (-price if ch.payer == ch.j else 0))
    return LinkQuote((i, ch.j), price, di, dj, eff, ch.payer)


def pref1_choice(topology: Topology, params: GameParams, i: int) -> LinkQuote | None:
    topology._check(i)
    cands, mine, theirs, unit = _candidates(topology, params, i)
    return _quote(i, choose_pref1(i, cands), mine, theirs, unit)


def pref2_choice(topology: Topology, params: GameParams, i: int, rng: random.Random) -> LinkQuote | None:
    topology._check(i)
    cands, mine, theirs, unit = _candidates(topology, params, i)
    return _quote(i, choose_pref2(i, cands, rng), mine, theirs, unit)


def pref2_table(topology: Topology, params: GameParams, i: int) -> dict[int, dict[str, Fraction]]:
    """Per-partner ``alpha``, price and effective delta for every acceptable partner."""
    cands, mine, theirs, unit = _candidates(topology, params, i)
    pool = [(j, di, dj) for j, di, dj in cands if _add(di, _pos(dj)) < ZERO2]
    if not pool:
        return {}
    jstar, dstar, djstar = max(pool, key=lambda c: (c[1], -c[0]))
    base = _add(dstar, _pos(djstar))
    out = {}
    for j, di, dj in pool:
        alpha = _sub(base, di)
        price = max(ZERO2, alpha, dj)
        out[j] = {
            "alpha": Fraction(alpha[1], unit),
            "price": Fraction(price[1], unit),
            "effective": Fraction(_add(di, price)[1], unit),
            "seller_delta": Fraction(dj[1], unit),
            "is_jstar": j == jstar,
        }
    return out


def run_monetary_game(config, params: GameParams):
    """Run the dynamics engine with transfers switched on."""
    from .dynamics import Preference, run_game

    if not config.transfers:
        raise DomainError("run_monetary_game needs config.transfers = True")
    if config.preference is Preference.NONE:
        raise DomainError("a preference order must be selected when transfers are allowed")
    return run_game(config, params)


def link_class(topology: Topology, u: int, v: int) -> str:
    a, b = topology.types[u].name, topology.types[v].name
    return "-".join(sorted((a, b)))


def transfer_summary(trace) -> dict[str, Fraction]:
    """Total payments recorded at formation, keyed by link class ``A-A``, ``A-B``, ``B-B``."""
    totals = {"A-A": Fraction(0), "A-B": Fraction(0), "B-B": Fraction(0)}
    types = {}
    for ev in trace.events:
        if ev.kind == "Arrival":
            types[ev.node] = ev.ptype.name
        elif ev.kind == "LinkAdded" and ev.payment:
            u, v = ev.pair
            totals["-".join(sorted((types[u], types[v])))] += ev.payment
    return totals
