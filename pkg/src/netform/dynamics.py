"""Turn-based formation dynamics.

Players arrive in schedule order and each newcomer immediately takes a
turn; afterwards turns follow the configured order.  In a turn the active
player repeatedly performs the single act that lowers its own cost the most
(additions need the partner's consent, i.e. a strict cost drop for the
partner).  Under ``R2a`` a type-B player may instead run a grand plan: drop
all of its links, reattach to its best partner and continue greedily,
accepted when the turn ends strictly cheaper than plain greedy play.

With transfers, formation and removal are gated by the summed delta and
partners are chosen by the preference order (see :mod:`netform.monetary`).
"""

from __future__ import annotations

import enum
import random
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import stats

from . import kernels
from .cost import GameParams, PaymentLedger
from .graph import DomainError, PlayerType, Topology, canonical_pair
from .monetary import ZERO2, _add, choose_free, choose_pref1, choose_pref2


class Rule(enum.Enum):
    R2A = "R2a"
    R2B = "R2b"


class Preference(enum.Enum):
    NONE = "None"
    PREF1 = "PrefOrder1"
    PREF2 = "PrefOrder2"


@dataclass(frozen=True)
class RoundRobin:
    pass


@dataclass(frozen=True)
class UniformRandom:
    seed: int


@dataclass(frozen=True)
class DynamicsConfig:
    arrival_schedule: tuple[PlayerType, ...]
    rule: Rule = Rule.R2A
    transfers: bool = False
    preference: Preference = Preference.NONE
    turn_order: RoundRobin | UniformRandom = RoundRobin()
    max_turns: int = 100_000
    acts_cap_per_turn: int | None = None
    seed: int = 0  # tie-breaking stream for PrefOrder2
    record_snapshots: bool = True

    def __post_init__(self) -> None:
        sched = tuple(PlayerType.parse(t) if isinstance(t, str) else PlayerType(t) for t in self.arrival_schedule)
        object.__setattr__(self, "arrival_schedule", sched)
        if not sched:
            raise DomainError("arrival schedule is empty")
        if self.acts_cap_per_turn is not None and self.acts_cap_per_turn < 1:
            raise DomainError("acts_cap_per_turn must be at least 1")
        if self.max_turns < 1:
            raise DomainError("max_turns must be at least 1")

    @property
    def n(self) -> int:
        return len(self.arrival_schedule)

    @property
    def acts_cap(self) -> int:
        return self.acts_cap_per_turn or 2 * self.n * self.n


def schedule(text: str) -> tuple[PlayerType, ...]:
    """``"AAABB"`` or ``"3A,5B"`` style schedule strings."""
    text = text.replace(" ", "")
    if "," in text or any(ch.isdigit() for ch in text):
        out: list[PlayerType] = []
        for part in text.split(","):
            if not part:
                continue
            count, t = (int(part[:-1]) if part[:-1] else 1), part[-1]
            out.extend([PlayerType.parse(t)] * count)
        return tuple(out)
    return tuple(PlayerType.parse(ch) for ch in text)


@dataclass(frozen=True)
class Event:
    turn: int
    act: int
    kind: str  # Arrival, TurnStart, TurnEnd, LinkAdded, LinkRemoved
    pair: tuple[int, int] | None = None
    payment: Fraction = Fraction(0)
    payer: int | None = None
    node: int | None = None
    ptype: PlayerType | None = None


class Region(enum.Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    UNDEFINED = "Undefined"


@dataclass(frozen=True)
class PhaseState:
    S_size: int
    L_size: int
    D_size: int
    m_A: int
    star_center_x: int | None
    first_linker_k: int | None
    kx_present: bool
    region: Region
    term1: Fraction | None = None
    term2: Fraction | None = None
    on_nullcline: bool = False
    n_B: int = 0

    @property
    def partition_holds(self) -> bool:
        return self.S_size + self.L_size + 1 == self.n_B


@dataclass
class GameTrace:
    config: DynamicsConfig
    params: GameParams
    events: list[Event] = field(default_factory=list)
    snapshots: list[tuple[int, PhaseState]] = field(default_factory=list)
    converged_at: int | None = None  # turn at which convergence was certified
    last_act_turn: int = 0
    arrival_turns: int = 0
    passes: int = 0  # round-robin passes containing at least one act
    anomalies: list[str] = field(default_factory=list)
    final: Topology | None = None
    ledger: PaymentLedger = field(default_factory=PaymentLedger)
    first_linker: int | None = None

    @property
    def converged(self) -> bool:
        return self.converged_at is not None


def replay(trace: GameTrace) -> Topology:
    """Rebuild the final topology from the event log alone."""
    types: list[PlayerType] = []
    links: set[tuple[int, int]] = set()
    for ev in trace.events:
        if ev.kind == "Arrival":
            if ev.node != len(types):
                raise DomainError("arrival ids must be dense")
            types.append(ev.ptype)
        elif ev.kind == "LinkAdded":
            if ev.pair in links:
                raise DomainError(f"replay adds existing link {ev.pair}")
            links.add(ev.pair)
        elif ev.kind == "LinkRemoved":
            links.remove(ev.pair)
    return Topology(tuple(types), frozenset(links))


def replay_turns(trace: GameTrace):
    """Yield ``(turn, topology)`` at the end of every turn."""
    types: list[PlayerType] = []
    links: set[tuple[int, int]] = set()
    for ev in trace.events:
        if ev.kind == "Arrival":
            types.append(ev.ptype)
        elif ev.kind == "LinkAdded":
            links.add(ev.pair)
        elif ev.kind == "LinkRemoved":
            links.discard(ev.pair)
        elif ev.kind == "TurnEnd":
            yield ev.turn, Topology(tuple(types), frozenset(links))


# --- phase-state geometry -------------------------------------------------


def _bits(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def star_center(topology: Topology) -> int | None:
    """Type-B node with the most type-B neighbours, lowest id on ties (degree 0 included)."""
    b_mask = ((1 << topology.n) - 1) & ~topology.a_mask
    best, best_deg = None, -1
    for b in topology.type_b:
        d = (topology.adj[b] & b_mask).bit_count()
        if d > best_deg:
            best, best_deg = b, d
    return best


def first_linker_from_events(events: list[Event], types: tuple[PlayerType, ...]) -> int | None:
    for ev in events:
        if ev.kind == "LinkAdded":
            u, v = ev.pair
            if types[u] is not types[v]:
                return u if types[u] is PlayerType.A else v
    return None


def phase_state(topology: Topology, params: GameParams, history: GameTrace | None = None,
                first_linker: int | None = None, monetary: bool | None = None) -> PhaseState:
    if first_linker is None and history is not None:
        first_linker = history.first_linker
        if first_linker is None:
            first_linker = first_linker_from_events(history.events, topology.types)
    if monetary is None:
        monetary = bool(history and history.config.transfers)
    x = star_center(topology)
    k = first_linker
    a_mask = topology.a_mask
    b_mask = ((1 << topology.n) - 1) & ~a_mask
    m_A = len(topology.type_a)
    n_B = topology.n - m_A
    S = (topology.adj[x] & b_mask).bit_count() if x is not None else 0
    D = (topology.adj[x] & a_mask).bit_count() if x is not None else 0
    if k is not None:
        lmask = topology.adj[k] & b_mask
        if x is not None:
            lmask &= ~(1 << x)
        L = lmask.bit_count()
    else:
        L = 0
    kx = x is not None and k is not None and bool(topology.adj[k] >> x & 1)
    if x is None or k is None:
        return PhaseState(S, L, D, m_A, x, k, kx, Region.UNDEFINED, None, None, False, n_B)
    A = params.A
    if monetary:
        term1 = 2 * params.c - A - S - 1
    else:
        term1 = params.c_A - S - 1
    if kx:
        term2 = -A * (1 + m_A - D) + 1 + S - L
    else:
        term2 = -A * (1 + m_A - D) + 2 * (1 + S - L)
    if term1 == 0 or term2 == 0:
        region, null = Region.UNDEFINED, True
    elif term1 < 0 < term2:
        region, null = Region.R3, False
    elif term2 < 0 < term1:
        region, null = Region.R1, False
    elif term1 > 0:
        region, null = Region.R4, False
    else:
        region, null = Region.R2, False
    return PhaseState(S, L, D, m_A, x, k, kx, region, Fraction(term1), Fraction(term2), null, n_B)


@dataclass(frozen=True)
class StructureLabel:
    label: str  # canonical, cross-tier, counterexample
    clique_complete: bool
    dual: tuple[int, ...] = ()
    orphans: tuple[int, ...] = ()
    cross_links: tuple[tuple[int, int], ...] = ()


def classify_structure(topology: Topology, phase: PhaseState, params: GameParams, transfers: bool = False) -> StructureLabel:
    """Label a snapshot as clique + star(x, S) + fan(k, L) + D-links, possibly with cross-tier links."""
    A_nodes = topology.type_a
    a_mask = topology.a_mask
    clique = all((topology.adj[a] & a_mask) | (1 << a) == a_mask for a in A_nodes)
    x, k = phase.star_center_x, phase.first_linker_k
    allowed: set[tuple[int, int]] = {canonical_pair(a, b) for i, a in enumerate(A_nodes) for b in A_nodes[i + 1:]}
    if x is not None:
        allowed |= {canonical_pair(x, j) for j in topology.neighbors(x)}
    if k is not None:
        allowed |= {canonical_pair(k, b) for b in topology.neighbors(k) if topology.types[b] is PlayerType.B}
    cross = tuple(sorted(topology.links - allowed))
    dual, orphans = [], []
    for b in topology.type_b:
        if b == x:
            continue
        in_s = x is not None and topology.has_link(b, x)
        in_l = k is not None and topology.has_link(b, k)
        if in_s and in_l:
            dual.append(b)
        elif not in_s and not in_l and (x is not None or k is not None):
            if not any(canonical_pair(b, j) in cross for j in topology.neighbors(b)):
                orphans.append(b)
    if clique and not cross and not dual and not orphans:
        label = "canonical"
    elif clique and not orphans and (params.c_A < 2 or not phase.kx_present or transfers or cross or dual):
        label = "cross-tier"
    else:
        label = "counterexample"
    return StructureLabel(label, clique, tuple(dual), tuple(orphans), cross)


# --- engine ----------------------------------------------------------------


class _CapExceeded(Exception):
    pass


class _Engine:
    def __init__(self, config: DynamicsConfig, params: GameParams):
        self.cfg = config
        self.params = params
        self.cA, self.cB, self.Aw, self.unit = params.scaled()
        self.types: list[PlayerType] = []
        self.adj: list[int] = []
        self.a_mask = 0
        self.trace = GameTrace(config, params)
        self.payments: dict[tuple[int, int], int] = {}  # scaled, payer -> payee
        self.turn = 0
        self.no_act: set = set()
        seed = config.turn_order.seed if isinstance(config.turn_order, UniformRandom) else config.seed
        self.order_rng = random.Random(f"order:{seed}")
        self.tie_rng = random.Random(f"ties:{config.seed}")
        if config.transfers and config.preference is Preference.NONE:
            raise DomainError("transfers need a preference order")

    # cost helpers
    def _link(self, i: int) -> int:
        return self.cA if self.types[i] is PlayerType.A else self.cB

    def _cost(self, sums, deg: int, i: int) -> tuple[int, int]:
        return (sums[2], deg * self._link(i) + self.Aw * sums[0] + self.unit * sums[1])

    def _deltas(self, adj: list[int], i: int):
        n = len(adj)
        base_sums = kernels.all_dist_sums(adj, n, self.a_mask)
        base = [self._cost(base_sums[j], adj[j].bit_count(), j) for j in range(n)]
        own, other = kernels.toggle_sums(adj, n, i, self.a_mask)
        deg_i = adj[i].bit_count()
        mine: list = [None] * n
        theirs: list = [None] * n
        for j in range(n):
            if j == i:
                continue
            step = -1 if adj[i] >> j & 1 else 1
            a = self._cost(own[j], deg_i + step, i)
            b = self._cost(other[j], adj[j].bit_count() + step, j)
            mine[j] = (a[0] - base[i][0], a[1] - base[i][1])
            theirs[j] = (b[0] - base[j][0], b[1] - base[j][1])
        return base[i], mine, theirs

    # one act chooser; returns (kind, j, payment, payer, actor_money) or None
    def _choose(self, adj: list[int], i: int):
        base_i, mine, theirs = self._deltas(adj, i)
        n = len(adj)
        row = adj[i]
        if not self.cfg.transfers:
            best = None
            for j in range(n):
                if j == i:
                    continue
                dm = mine[j]
                if not dm < ZERO2:
                    continue
                if row >> j & 1:
                    cand = (dm, 1, j)
                elif theirs[j] < ZERO2:
                    cand = (dm, 0, j)
                else:
                    continue
                if best is None or cand < best:
                    best = cand
            if best is None:
                return None
            return ("add" if best[1] == 0 else "remove", best[2], 0, None, 0)
        cands = [(j, mine[j], theirs[j]) for j in range(n) if j != i and not row >> j & 1]
        if base_i[0]:
            ch = choose_free(i, cands)
        elif self.cfg.preference is Preference.PREF1:
            ch = choose_pref1(i, cands)
        else:
            ch = choose_pref2(i, cands, self.tie_rng)
        if ch is not None:
            money = 0
            if ch.payer == i:
                money = ch.price
            elif ch.payer == ch.j:
                money = -ch.price
            return ("add", ch.j, ch.price, ch.payer, money)
        best = None
        for j in range(n):
            if j != i and row >> j & 1:
                s = _add(mine[j], theirs[j])
                if s < ZERO2 and (best is None or (s, j) < best):
                    best = (s, j)
        if best is None:
            return None
        return ("remove", best[1], 0, None, 0)

    def _own_cost(self, adj: list[int], i: int) -> tuple[int, int]:
        sums = kernels.dist_sums(adj, len(adj), i, self.a_mask)
        return self._cost(sums, adj[i].bit_count(), i)

    def _greedy(self, adj: list[int], i: int, acts: list, budget: int) -> int:
        """Apply greedy acts to ``adj`` in place; returns money spent (scaled)."""
        spent = 0
        while True:
            choice = self._choose(adj, i)
            if choice is None:
                return spent
            if len(acts) >= budget:
                raise _CapExceeded()
            kind, j, price, payer, money = choice
            adj[i] ^= 1 << j
            adj[j] ^= 1 << i
            acts.append((kind, j, price, payer))
            spent += money

    def _plan_reattach(self, adj: list[int], i: int, budget: int):
        acts: list = []
        for j in _bits(adj[i]):
            adj[i] ^= 1 << j
            adj[j] ^= 1 << i
            acts.append(("remove", j, 0, None))
        base_i, mine, theirs = self._deltas(adj, i)
        best = None
        for j in range(len(adj)):
            if j != i and theirs[j] < ZERO2 and (best is None or (mine[j], j) < best):
                best = (mine[j], j)
        if best is None:
            return None
        j = best[1]
        adj[i] ^= 1 << j
        adj[j] ^= 1 << i
        acts.append(("add", j, 0, None))
        spent = self._greedy(adj, i, acts, budget)
        return acts, spent

    def play_turn(self, i: int) -> int:
        key = (tuple(self.adj), i)
        if key in self.no_act:
            self._log(Event(self.turn, 0, "TurnStart", node=i))
            self._log(Event(self.turn, 0, "TurnEnd", node=i))
            return 0
        budget = self.cfg.acts_cap
        start = self._own_cost(self.adj, i)
        g_adj = list(self.adj)
        g_acts: list = []
        g_spent = self._greedy(g_adj, i, g_acts, budget)
        g_cost = self._own_cost(g_adj, i)
        g_final = (g_cost[0], g_cost[1] + g_spent)
        acts = g_acts
        if (
            self.cfg.rule is Rule.R2A
            and self.types[i] is PlayerType.B
            and self.adj[i]
            and start[0] == 0
        ):
            p_adj = list(self.adj)
            try:
                plan = self._plan_reattach(p_adj, i, budget)
            except _CapExceeded:
                plan = None
            if plan is not None:
                p_acts, p_spent = plan
                p_cost = self._own_cost(p_adj, i)
                p_final = (p_cost[0], p_cost[1] + p_spent)
                if p_final < g_final and p_final[0] == 0:
                    acts = p_acts
        self._log(Event(self.turn, 0, "TurnStart", node=i))
        for n_act, (kind, j, price, payer) in enumerate(acts, 1):
            pair = canonical_pair(i, j)
            self.adj[i] ^= 1 << j
            self.adj[j] ^= 1 << i
            if kind == "add":
                pay = Fraction(price, self.unit)
                if payer is not None and price:
                    payee = j if payer == i else i
                    self.payments[(payer, payee)] = self.payments.get((payer, payee), 0) + price
                self._log(Event(self.turn, n_act, "LinkAdded", pair, pay, payer if price else None))
                if self.trace.first_linker is None and self.types[i] is not self.types[j]:
                    self.trace.first_linker = i if self.types[i] is PlayerType.A else j
            else:
                self.payments.pop((i, j), None)
                self.payments.pop((j, i), None)
                self._log(Event(self.turn, n_act, "LinkRemoved", pair))
        self._log(Event(self.turn, len(acts), "TurnEnd", node=i))
        if kernels.dist_sums(self.adj, len(self.adj), i, self.a_mask)[2] and len(self.adj) > 1:
            self.trace.anomalies.append(f"turn {self.turn}: player {i} ended disconnected")
        if not acts:
            self.no_act.add(key)
        return len(acts)

    def _log(self, ev: Event) -> None:
        self.trace.events.append(ev)

    def topology(self) -> Topology:
        return Topology.from_masks(tuple(self.types), self.adj)

    def _snapshot(self) -> None:
        if self.cfg.record_snapshots:
            top = self.topology()
            self.trace.snapshots.append(
                (self.turn, phase_state(top, self.params, first_linker=self.trace.first_linker, monetary=self.cfg.transfers))
            )

    def run(self) -> GameTrace:
        cfg = self.cfg
        tr = self.trace
        n = cfg.n
        idle: set[int] = set()
        try:
            for t in cfg.arrival_schedule:
                i = len(self.types)
                self.types.append(t)
                self.adj.append(0)
                if t is PlayerType.A:
                    self.a_mask |= 1 << i
                self.turn += 1
                self._log(Event(self.turn, 0, "Arrival", node=i, ptype=t))
                if self.play_turn(i):
                    tr.last_act_turn = self.turn
                    idle.clear()
                else:
                    idle.add(i)
                self._snapshot()
                if self.turn >= cfg.max_turns:
                    break
            tr.arrival_turns = self.turn
            rr = isinstance(cfg.turn_order, RoundRobin)
            pass_acts = 0
            while self.turn < cfg.max_turns:
                if rr:
                    i = (self.turn - tr.arrival_turns) % n
                else:
                    i = self.order_rng.randrange(n)
                self.turn += 1
                acted = self.play_turn(i)
                self._snapshot()
                if acted:
                    tr.last_act_turn = self.turn
                    idle.clear()
                    pass_acts += 1
                else:
                    idle.add(i)
                if rr:
                    if (self.turn - tr.arrival_turns) % n == 0:
                        if pass_acts == 0:
                            tr.converged_at = self.turn
                            break
                        tr.passes += 1
                        pass_acts = 0
                elif len(idle) == n:
                    tr.converged_at = self.turn
                    break
        except _CapExceeded:
            tr.anomalies.append(f"turn {self.turn}: acts cap {cfg.acts_cap} exceeded")
            tr.converged_at = None
        tr.final = self.topology()
        tr.ledger = PaymentLedger({k: Fraction(v, self.unit) for k, v in self.payments.items() if v})
        if tr.first_linker is None:
            tr.first_linker = first_linker_from_events(tr.events, tr.final.types)
        return tr


def run_game(config: DynamicsConfig, params: GameParams) -> GameTrace:
    if not params.in_main_regime():
        warnings.warn("parameters outside 1 < c_A < A and c_B < A; theorem regime does not apply", stacklevel=2)
    return _Engine(config, params).run()


# --- Monte-Carlo statistics --------------------------------------------------


@dataclass(frozen=True)
class TailFit:
    slope: float
    intercept: float
    r_squared: float
    points: int


@dataclass(frozen=True)
class ConvergenceReport:
    n: int
    trials: int
    certified_turns: tuple[int | None, ...]
    last_act_turns: tuple[int, ...]
    tail: TailFit | None

    def survival(self, t: int) -> float:
        if not self.trials:
            return 0.0
        return sum(1 for c in self.certified_turns if c is None or c > t) / self.trials


def _trial(args):
    config, params = args
    tr = _Engine(config, params).run()
    return tr.converged_at, tr.last_act_turn


def fit_tail(turns, n: int, lo: int | None = None, hi: int | None = None) -> TailFit | None:
    """Log-linear fit of P(T > t) over ``t`` in ``[lo, hi]`` (default ``[2n, 10n]``)."""
    lo = 2 * n if lo is None else lo
    hi = 10 * n if hi is None else hi
    arr = np.array([np.inf if t is None else t for t in turns], dtype=float)
    if arr.size == 0:
        return None
    ts = np.arange(lo, hi + 1)
    surv = np.array([(arr > t).mean() for t in ts])
    keep = surv > 0
    if keep.sum() < 3:
        return None
    res = stats.linregress(ts[keep], np.log(surv[keep]))
    return TailFit(float(res.slope), float(res.intercept), float(res.rvalue**2), int(keep.sum()))


def convergence_statistics(config: DynamicsConfig, params: GameParams, trials: int, workers: int = 1,
                           base_seed: int = 0) -> ConvergenceReport:
    if not isinstance(config.turn_order, UniformRandom):
        raise DomainError("convergence statistics need a UniformRandom turn order")
    n = config.n
    if trials <= 0:
        return ConvergenceReport(n, 0, (), (), None)
    jobs = [
        (replace(config, turn_order=UniformRandom(base_seed + s), seed=base_seed + s, record_snapshots=False), params)
        for s in range(trials)
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                out = list(pool.map(_trial, jobs, chunksize=max(1, trials // (8 * workers))))
        else:
            out = [_trial(j) for j in jobs]
    certified = tuple(c for c, _ in out)
    last = tuple(l for _, l in out)
    return ConvergenceReport(n, trials, certified, last, fit_tail(certified, n))
