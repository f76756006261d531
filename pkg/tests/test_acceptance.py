"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s``; a summary block with one line
per criterion is also printed at the end of every pytest session.
"""

import itertools
import os
import random
import time
import warnings
from fractions import Fraction as F

import networkx as nx
import pytest

from netform.canonical import (
    FullBipartiteOnClique,
    LoopExample,
    StarOnClique,
    absorbed_star_cost,
    absorbed_star_cost_as_printed,
    build,
    check_distance_bounds,
    closed_form_cost,
    label_topology,
    lines_cost_as_printed,
    loop_feasible,
    optimal_cost,
    poor_eq_line_length,
    shortcut_gain,
    single_act_cost_bound,
    stability_prices,
)
from netform.cost import GameParams, social_cost
from netform.dynamics import (
    DynamicsConfig,
    Preference,
    Region,
    RoundRobin,
    Rule,
    UniformRandom,
    convergence_statistics,
    run_game,
    schedule,
)
from netform.graph import PlayerType, Topology
from netform.metrics import k_core, mean_node_core_distance, subgraph_density
from netform.monetary import run_monetary_game
from netform.stability import enumerate_stable, is_pairwise_stable
from oracles import endpoint_cycle_gain

warnings.simplefilter("ignore")

RESULTS: dict[int, tuple[bool, str]] = {}
MONETARY_RUNS: list = []  # traces from criteria 8 and 9, checked by criterion 10


def report(num: int, ok: bool, detail: str) -> None:
    RESULTS[num] = (ok, detail)
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}")
    assert ok, detail


def complete(n):
    return Topology.from_edges("B" * n, itertools.combinations(range(n), 2))


def test_c01_clique_lemma():
    t0 = time.perf_counter()
    p = GameParams(F(1, 2), F(1, 2), 2)
    sets = {n: enumerate_stable(0, n, p).stable_set for n in (3, 4)}
    dt = time.perf_counter() - t0
    ok = all(s == {complete(n)} for n, s in sets.items()) and dt < 10
    report(1, ok, f"stable sets at n_B=3,4 are exactly K3, K4 ({dt:.2f}s)")


def test_c02_closed_form_vs_bruteforce():
    t0 = time.perf_counter()
    bad = []
    for c, A in itertools.product([F(3, 2), 2, 3], [2, 4]):
        p = GameParams(c, c, A)
        for ta, tb in itertools.product(range(1, 5), range(1, 7)):
            for kind in (StarOnClique(), FullBipartiteOnClique()):
                sc = social_cost(build(kind, ta, tb), p)
                if sc.unreachable_count or sc.finite_part != closed_form_cost(kind, ta, tb, p):
                    bad.append((type(kind).__name__, c, A, ta, tb))
    dt = time.perf_counter() - t0
    report(2, not bad and dt < 10, f"{6 * 24 * 2} closed forms equal direct social cost, mismatches={bad[:3]} ({dt:.2f}s)")


def test_c03_price_of_stability():
    t0 = time.perf_counter()
    basic = [GameParams(2, 2, 3), GameParams(3, 3, 4), GameParams(F(3, 2), 3, 2), GameParams(2, 3, 4)]
    money = [GameParams(2, 2, 4), GameParams(F(3, 2), F(3, 2), 4), GameParams(2, 3, 6), GameParams(3, 3, 8)]
    out = []
    for p in basic:
        assert (p.A + 1) / 2 <= p.c
        rep = enumerate_stable(2, 3, p)
        out.append(rep.min_stable_cost == rep.optimum_cost == optimal_cost(2, 3, p))
    for p in money:
        assert (p.A + 1) / 2 > p.c
        rep = enumerate_stable(2, 3, p, transfers=True)
        out.append(rep.price_of_stability == 1 and rep.optimum_cost == optimal_cost(2, 3, p))
    dt = time.perf_counter() - t0
    report(3, all(out) and dt < 120, f"PoS = 1 at (2,3) for {sum(out)}/{len(out)} parameter points ({dt:.2f}s)")


def test_c04_star_convergence():
    t0 = time.perf_counter()
    p = GameParams(2, 2, 4)
    sched = schedule("ABBABBABBBB")
    assert 3 * p.A > 8
    # (A+1)/2 > c here, so the global optimum is the full bipartite graph,
    # which is not pairwise stable; the target is the cheapest stable structure
    star = closed_form_cost(StarOnClique(), 3, 8, p)
    fb = build(FullBipartiteOnClique(), 3, 8)
    assert is_pairwise_stable(build(StarOnClique(), 3, 8), p).stable and not is_pairwise_stable(fb, p).stable
    finals = []
    for s in range(100):
        top = run_game(DynamicsConfig(sched, turn_order=UniformRandom(s)), p).final
        optimal = social_cost(top, p).finite_part == star
        finals.append(label_topology(top) if optimal else "suboptimal")
    rr = [run_game(DynamicsConfig(schedule(s), turn_order=RoundRobin()), p)
          for s in ("ABBABBABBBB", "BBABBABBABB", "AAABBBBBBBB", "BABBBABBBAB")]
    rr_ok = all(t.converged and t.passes <= 3 and label_topology(t.final) == "StarOnClique" for t in rr)
    n_star = finals.count("StarOnClique")
    dt = time.perf_counter() - t0
    report(4, n_star == 100 and rr_ok and dt < 60,
           f"{n_star}/100 random orders end at StarOnClique (cost {star}; unstable global optimum {optimal_cost(3, 8, p)}); round-robin passes={[t.passes for t in rr]} ({dt:.2f}s)")


def test_c05_absorbed_star_basin():
    t0 = time.perf_counter()
    cases = [(GameParams(2, 2, 4), "BBBBBAAABBB"), (GameParams(F(3, 2), 2, 4), "BBBBBBAAAAB")]
    ok, parts = True, []
    for p, s in cases:
        tr = run_game(DynamicsConfig(schedule(s)), p)
        top = tr.final
        ta, tb = len(top.type_a), len(top.type_b)
        cost = social_cost(top, p).finite_part
        regions = {ph.region for _, ph in tr.snapshots}
        ok &= label_topology(top) == "AbsorbedStar" and cost == absorbed_star_cost(ta, tb, p) and Region.R3 in regions
        parts.append(f"{s}: cost {cost} vs formula {absorbed_star_cost(ta, tb, p)} "
                     f"(as printed {absorbed_star_cost_as_printed(ta, tb, p)})")
    dt = time.perf_counter() - t0
    report(5, ok and dt < 10, "; ".join(parts) + f" ({dt:.2f}s)")


def test_c06_exponential_tail():
    t0 = time.perf_counter()
    cfg = DynamicsConfig(schedule("ABBABBABBB"), turn_order=UniformRandom(0))
    rep = convergence_statistics(cfg, GameParams(2, 2, 4), 10_000, workers=os.cpu_count() or 1)
    dt = time.perf_counter() - t0
    fit = rep.tail
    ok = fit is not None and fit.r_squared > 0.9 and dt < 300
    report(6, ok, f"R^2={fit.r_squared:.4f} slope={fit.slope:.4f} over {fit.points} points, "
                  f"non-converged={sum(c is None for c in rep.certified_turns)} ({dt:.1f}s)")


def test_c07_rule2b_bound():
    t0 = time.perf_counter()
    p = GameParams(2, 3, 4)
    worst, violations = F(0), 0
    bound = single_act_cost_bound(6, 40, p)
    opt = optimal_cost(6, 40, p)
    for s in range(100):
        sched = [PlayerType.A] * 6 + [PlayerType.B] * 40
        random.Random(s).shuffle(sched)
        tr = run_game(DynamicsConfig(tuple(sched), rule=Rule.R2B, turn_order=UniformRandom(s)), p)
        sc = social_cost(tr.final, p)
        violations += sc.unreachable_count > 0 or sc.finite_part > bound
        worst = max(worst, sc.finite_part / opt)
    dt = time.perf_counter() - t0
    ok = violations == 0 and worst <= F(3, 2) + F(1, 10) and dt < 120
    report(7, ok, f"bound violations={violations}, worst cost/optimal={float(worst):.4f} ({dt:.2f}s)")


def test_c08_monetary_convergence():
    t0 = time.perf_counter()
    p = GameParams(2, 2, 4)
    assert (p.A + 1) / 2 > p.c
    labels = []
    for s in range(50):
        sched = [PlayerType.A] * 3 + [PlayerType.B] * 5
        random.Random(s).shuffle(sched)
        cfg = DynamicsConfig(tuple(sched), transfers=True, preference=Preference.PREF1, turn_order=UniformRandom(s))
        tr = run_monetary_game(cfg, p)
        MONETARY_RUNS.append(tr)
        labels.append(label_topology(tr.final))
    dt = time.perf_counter() - t0
    n_fb = labels.count("FullBipartiteOnClique")
    report(8, n_fb == 50 and dt < 60, f"{n_fb}/50 random orders end at FullBipartiteOnClique ({dt:.2f}s)")


def test_c09_transfers_can_hurt():
    t0 = time.perf_counter()
    p = GameParams(F(11, 2), F(11, 2), 7)
    sched = schedule("BBBBAAABBBB")
    plain = run_game(DynamicsConfig(sched), p)
    money = run_monetary_game(DynamicsConfig(sched, transfers=True, preference=Preference.PREF1), p)
    MONETARY_RUNS.append(money)
    a, b = label_topology(plain.final), label_topology(money.final)
    opt = optimal_cost(3, 8, p)
    plain_opt = social_cost(plain.final, p).finite_part == opt
    dt = time.perf_counter() - t0
    ok = plain_opt and b == "AbsorbedStar" and dt < 10
    report(9, ok, f"transfer-free run ends {a} (optimal={plain_opt}), transfer run ends {b} ({dt:.2f}s)")


def test_c10_settlement_free_clique():
    if not MONETARY_RUNS:
        pytest.skip("needs criteria 8 and 9 in the same session")
    paid = []
    for tr in MONETARY_RUNS:
        top = tr.final
        for u, v in top.links:
            if top.types[u] is PlayerType.A and top.types[v] is PlayerType.A and tr.ledger.link_payment(u, v):
                paid.append((u, v, tr.ledger.link_payment(u, v)))
        for ev in tr.events:
            if ev.kind == "LinkAdded" and ev.payment and all(top.types[x] is PlayerType.A for x in ev.pair):
                paid.append(ev.pair)
    report(10, not paid, f"{len(MONETARY_RUNS)} monetary runs, A-A links with payments: {paid[:3]}")


def test_c11_distance_bounds():
    t0 = time.perf_counter()
    checked, failures = 0, []
    for c, A in itertools.product([F(3, 2), 2, 3], [2, 4]):
        p = GameParams(c, c, A)
        for n in range(2, 7):
            for na in range(0, n + 1):
                for transfers in (False, True):
                    for e in enumerate_stable(na, n - na, p, transfers).stable:
                        checked += 1
                        chk = check_distance_bounds(e.topology, p, transfers)
                        if not chk.ok:
                            failures.append((c, A, transfers, e.topology.sorted_links(), chk.violations[0], e.knife_edge))
    dt = time.perf_counter() - t0
    knife = sum(f[-1] for f in failures)
    detail = f"{checked} stable topologies checked, {len(failures)} violate a bound ({knife} knife-edge) ({dt:.1f}s)"
    if failures:
        c, A, tr, links, why, _ = failures[0]
        detail += f"; first: c={c} A={A} transfers={tr} links={links} {why}"
    report(11, not failures and dt < 300, detail)


def test_c12_loop_example():
    t0 = time.perf_counter()
    p = GameParams(8, 8, 9)
    res = is_pairwise_stable(build(LoopExample(5), 2, 5), p)
    dt = time.perf_counter() - t0
    report(12, loop_feasible(5, p) and res.stable and dt < 1, f"k=5 loop stable={res.stable} ({dt * 1e3:.1f} ms)")


def test_c13_shortcut_oracle():
    bad = [k for k in range(2, 21) if shortcut_gain(k) != endpoint_cycle_gain(k)]
    report(13, not bad, f"shortcut_gain matches BFS for k=2..20, mismatches={bad}")


def test_c14_poa_trend():
    t0 = time.perf_counter()
    ratios, printed = [], []
    for cB in (4, 9, 16, 25):
        p = GameParams(cB, cB, 26)
        ratios.append(stability_prices(5, 60, p, mode="closed_form").poa_lower)
        printed.append(lines_cost_as_printed(5, 60, poor_eq_line_length(p), p) / optimal_cost(5, 60, p))
    inc = all(a < b for a, b in zip(ratios, ratios[1:]))
    within = all(F(cB, 8) <= r <= 8 * cB for cB, r in zip((4, 9, 16, 25), ratios))
    dt = time.perf_counter() - t0
    report(14, inc and within and dt < 10,
           f"PoA lower bounds {[round(float(r), 3) for r in ratios]} increasing={inc} within 8x of c_B={within} "
           f"(printed-formula ratios {[round(float(r), 2) for r in printed]})")


def test_c15_metrics():
    t0 = time.perf_counter()
    g = nx.complete_graph(4)
    g.add_edges_from([(3, 4), (3, 5), (4, 6)])
    sos = nx.star_graph(3)
    sos.add_edges_from([(1, 4), (1, 5), (2, 6)])
    top = build(StarOnClique(), 3, 6)
    checks = [
        k_core(g, 2) == frozenset(range(4)),
        k_core(g, 3) == frozenset(range(4)),
        k_core(nx.star_graph(5), 2) == frozenset(),
        subgraph_density(g, range(4)) == 1,
        subgraph_density(g, range(7)) == F(9, 21),
        mean_node_core_distance(nx.star_graph(5), {0}, range(1, 6)).mean == 1,
        mean_node_core_distance(sos, {0}, range(1, 7)).mean == F(3, 2),
        mean_node_core_distance(g, range(4), {4, 5, 6}).mean == F(4, 3),
        mean_node_core_distance(top, top.type_a, top.type_b).mean == 1,
    ]
    dt = time.perf_counter() - t0
    report(15, all(checks) and dt < 1, f"{sum(checks)}/{len(checks)} metric oracles match ({dt * 1e3:.1f} ms)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
