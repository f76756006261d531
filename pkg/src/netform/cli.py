"""Scenario runner: ``netform run scenario.yaml [--set key=value] [--jobs N] [--out DIR]``.

A scenario is a YAML (or JSON) mapping::

    name: clique-lemma
    mode: enumerate            # enumerate | dynamics | monetary | canonical | metrics
    seed: 0
    params: {c_A: 1/2, c_B: 1/2, A: 2}
    enumerate: {n_A: 0, n_B: 3}
    assertions:
      - stable_set == {K3}

Everything is validated before any output is written.  Exit status is 0
when all assertions pass, 1 when one fails and 2 for malformed or
infeasible scenarios.
"""

from __future__ import annotations

import ast
import hashlib
import json
import operator
import os
import random
import re
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click
import yaml

from . import canonical as cn
from . import metrics as mx
from .cost import GameParams, social_cost, to_fraction
from .dynamics import (
    DynamicsConfig,
    Preference,
    RoundRobin,
    Rule,
    UniformRandom,
    run_game,
    schedule,
)
from .graph import DomainError, Topology, player_types, read_edge_list
from .monetary import transfer_summary
from .stability import enumerate_stable, is_pairwise_stable, is_stable_with_transfers

OUT_ENV = "NETFORM_OUT"
MODES = ("enumerate", "dynamics", "monetary", "canonical", "metrics")
EXIT_OK, EXIT_ASSERT, EXIT_BAD = 0, 1, 2


class ScenarioError(Exception):
    """Malformed or infeasible scenario (exit 2)."""


# --- loading ---------------------------------------------------------------


def load_scenario(path, overrides=()) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be a mapping")
    for item in overrides:
        apply_override(data, item)
    data.setdefault("name", path.stem)
    data.setdefault("seed", 0)
    data["_base"] = str(path.parent)
    return data


def apply_override(data: dict, item: str) -> None:
    if "=" not in item:
        raise ScenarioError(f"override {item!r} is not key=value")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ScenarioError(f"override key {key!r} does not exist")
        node = node[p]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ScenarioError(f"override key {key!r} does not exist")
    try:
        node[parts[-1]] = yaml.safe_load(raw)
    except yaml.YAMLError:
        node[parts[-1]] = raw


def scenario_hash(data: dict) -> str:
    clean = {k: v for k, v in data.items() if not k.startswith("_")}
    blob = json.dumps(clean, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# --- assertions ------------------------------------------------------------

SYMBOL = re.compile(r"^(K\d+|StarOnClique|FullBipartiteOnClique|AbsorbedStar|Other|R[1-4]|Undefined)$")
_CMP = {
    ast.Eq: operator.eq, ast.NotEq: operator.ne, ast.Lt: operator.lt, ast.LtE: operator.le,
    ast.Gt: operator.gt, ast.GtE: operator.ge, ast.In: lambda a, b: a in b,
    ast.NotIn: lambda a, b: a not in b,
}
_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul}
_FUNCS = {"len": len, "abs": abs, "min": min, "max": max}


def _names(tree) -> set[str]:
    return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}


def compile_assertion(text: str, keys: set[str]):
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ScenarioError(f"assertion {text!r}: {exc.msg}") from None
    allowed = (ast.Expression, ast.Compare, ast.BoolOp, ast.And, ast.Or, ast.UnaryOp, ast.Not, ast.USub,
               ast.BinOp, ast.Div, ast.Constant, ast.Name, ast.Load, ast.Set, ast.Tuple, ast.List,
               ast.Subscript, ast.Call, *_CMP, *_BIN)
    for node in ast.walk(tree):
        if not isinstance(node, allowed):
            raise ScenarioError(f"assertion {text!r}: {type(node).__name__} not allowed")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ScenarioError(f"assertion {text!r}: only {sorted(_FUNCS)} may be called")
    for name in _names(tree) - set(_FUNCS):
        if name not in keys and not SYMBOL.match(name):
            raise ScenarioError(f"assertion {text!r}: unknown name {name!r}")
    return tree


def evaluate(tree, ctx: dict):
    def ev(n):
        if isinstance(n, ast.Expression):
            return ev(n.body)
        if isinstance(n, ast.Constant):
            return Fraction(n.value) if isinstance(n.value, int) and not isinstance(n.value, bool) else n.value
        if isinstance(n, ast.Name):
            return ctx[n.id] if n.id in ctx else n.id
        if isinstance(n, (ast.Set,)):
            return frozenset(ev(e) for e in n.elts)
        if isinstance(n, (ast.Tuple, ast.List)):
            return tuple(ev(e) for e in n.elts)
        if isinstance(n, ast.Subscript):
            return ev(n.value)[ev(n.slice)]
        if isinstance(n, ast.Call):
            return _FUNCS[n.func.id](*(ev(a) for a in n.args))
        if isinstance(n, ast.UnaryOp):
            v = ev(n.operand)
            return (not v) if isinstance(n.op, ast.Not) else -v
        if isinstance(n, ast.BinOp):
            a, b = ev(n.left), ev(n.right)
            if isinstance(n.op, ast.Div):
                return Fraction(a) / Fraction(b)
            return _BIN[type(n.op)](a, b)
        if isinstance(n, ast.BoolOp):
            vals = (ev(v) for v in n.values)
            return all(vals) if isinstance(n.op, ast.And) else any(vals)
        if isinstance(n, ast.Compare):
            left = ev(n.left)
            for op, comp in zip(n.ops, n.comparators):
                right = ev(comp)
                if not _CMP[type(op)](left, right):
                    return False
                left = right
            return True
        raise ScenarioError(f"cannot evaluate {type(n).__name__}")

    return ev(tree)


# --- validation ------------------------------------------------------------


def _section(data: dict, mode: str) -> dict:
    sec = data.get(mode, {})
    if not isinstance(sec, dict):
        raise ScenarioError(f"'{mode}' section must be a mapping")
    return sec


def _int(sec: dict, key: str, default=None, lo: int | None = 0) -> int:
    v = sec.get(key, default)
    if v is None:
        raise ScenarioError(f"missing integer setting {key!r}")
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"setting {key!r} must be an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ScenarioError(f"setting {key!r} must be >= {lo}, got {v}")
    return v


def _params(data: dict) -> GameParams:
    p = data.get("params")
    if not isinstance(p, dict):
        raise ScenarioError("missing 'params' mapping with c_A, c_B, A")
    try:
        cA = p.get("c_A", p.get("c"))
        cB = p.get("c_B", p.get("c"))
        if cA is None or cB is None or "A" not in p:
            raise ScenarioError("params need c_A, c_B (or c) and A")
        return GameParams(to_fraction(str(cA)), to_fraction(str(cB)), to_fraction(str(p["A"])))
    except DomainError as exc:
        raise ScenarioError(f"params: {exc}") from None


@dataclass
class Plan:
    data: dict
    mode: str
    params: GameParams | None
    settings: dict
    assertions: list[tuple[str, object]]
    digest: str
    seed: int


RESULT_KEYS = {
    "enumerate": {"stable_set", "stable_count", "connected_count", "min_stable_cost", "max_stable_cost",
                  "optimum_cost", "pos", "poa", "knife_edge_count", "bound_violations"},
    "dynamics": {"final", "finals", "runs", "converged_runs", "all_converged", "max_passes", "max_certified_turn",
                 "max_cost_ratio", "final_cost", "optimal_cost", "cost_bound_violations", "regions",
                 "bound_violations"},
    "canonical": {"star_cost", "fb_cost", "optimal_cost", "absorbed_star_cost", "lines_cost", "line_length",
                  "pos", "poa_lower", "pos_asymptotic", "convergence_bound", "single_act_bound",
                  "worst_stable_bound", "star_stable", "fb_stable", "loop_stable", "loop_feasible"},
    "metrics": {"metrics", "snapshots"},
}
RESULT_KEYS["monetary"] = RESULT_KEYS["dynamics"] | {"transfers_AA", "transfers_AB", "transfers_BB",
                                                     "max_AA_payment", "ledger_balanced"}


def _schedule_spec(sec: dict):
    s = sec.get("schedule")
    if isinstance(s, str):
        try:
            sched = schedule(s)
        except (DomainError, ValueError) as exc:
            raise ScenarioError(f"schedule: {exc}") from None
        if not sched:
            raise ScenarioError("schedule is empty")
        return ("fixed", sched)
    if isinstance(s, dict):
        n_A, n_B = _int(s, "n_A"), _int(s, "n_B")
        if n_A + n_B < 1:
            raise ScenarioError("schedule needs at least one player")
        return ("shuffle" if s.get("shuffle", True) else "fixed", player_types(n_A, n_B))
    raise ScenarioError("dynamics need 'schedule': a string like 'AAB' / '3A,5B' or {n_A, n_B, shuffle}")


def plan(data: dict) -> Plan:
    mode = str(data.get("mode", "")).lower()
    if mode not in MODES:
        raise ScenarioError(f"mode must be one of {MODES}, got {data.get('mode')!r}")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError("seed must be an integer")
    params = _params(data) if mode != "metrics" else (_params(data) if "params" in data else None)
    sec = _section(data, mode)
    st: dict = {}
    if mode == "enumerate":
        st["n_A"], st["n_B"] = _int(sec, "n_A"), _int(sec, "n_B")
        st["transfers"] = bool(sec.get("transfers", False))
        if not 1 <= st["n_A"] + st["n_B"] <= 7:
            raise ScenarioError("enumeration needs 1..7 players")
    elif mode in ("dynamics", "monetary"):
        st["schedule"] = _schedule_spec(sec)
        st["runs"] = _int(sec, "runs", 1, lo=1)
        order = sec.get("order", "round_robin")
        if order not in ("round_robin", "random"):
            raise ScenarioError("order must be round_robin or random")
        st["order"] = order
        try:
            st["rule"] = Rule(sec.get("rule", "R2a"))
        except ValueError:
            raise ScenarioError("rule must be R2a or R2b") from None
        st["max_turns"] = _int(sec, "max_turns", 100_000, lo=1)
        traces = sec.get("traces", "first")
        if traces not in ("first", "all", "none"):
            raise ScenarioError("traces must be first, all or none")
        st["traces"] = traces
        if mode == "monetary":
            pref = {"pref1": Preference.PREF1, "pref2": Preference.PREF2,
                    "PrefOrder1": Preference.PREF1, "PrefOrder2": Preference.PREF2}.get(sec.get("preference"))
            if pref is None:
                raise ScenarioError("monetary mode needs preference: pref1 or pref2")
            st["transfers"], st["preference"] = True, pref
        else:
            if sec.get("transfers"):
                raise ScenarioError("use mode: monetary for runs with transfers")
            st["transfers"], st["preference"] = False, Preference.NONE
    elif mode == "canonical":
        st["n_A"], st["n_B"] = _int(sec, "n_A", lo=1), _int(sec, "n_B")
        st["line_length"] = sec.get("line_length")
        st["loop_k"] = sec.get("loop_k")
        st["transfers"] = bool(sec.get("transfers", False))
    else:
        snaps = sec.get("snapshots")
        if not isinstance(snaps, list) or not snaps:
            raise ScenarioError("metrics need a non-empty 'snapshots' list")
        base = Path(data.get("_base", "."))
        st["snapshots"] = [_metric_snapshot(s, base, params) for s in snaps]
        st["k"] = sec.get("k")
        st["core"] = sec.get("core", "type_A")
    keys = RESULT_KEYS[mode]
    raw = data.get("assertions", []) or []
    if not isinstance(raw, list):
        raise ScenarioError("assertions must be a list of expressions")
    compiled = [(str(a), compile_assertion(str(a), keys)) for a in raw]
    return Plan(data, mode, params, st, compiled, scenario_hash(data), seed)


def _metric_snapshot(s, base: Path, params):
    if not isinstance(s, dict) or "name" not in s:
        raise ScenarioError("each snapshot needs a name")
    name = str(s["name"])
    return name, _snapshot_graph(s, name, base), s.get("core")


def _snapshot_graph(s: dict, name: str, base: Path):
    try:
        if "edges" in s:
            types = s.get("types")
            return read_edge_list(base / s["edges"], base / types if types else None)
        if "canonical" in s:
            c = s["canonical"]
            kinds = {"StarOnClique": cn.StarOnClique(), "FullBipartiteOnClique": cn.FullBipartiteOnClique(),
                     "FullClique": cn.FullClique()}
            if c.get("kind") not in kinds:
                raise ScenarioError(f"snapshot {name}: unknown canonical kind {c.get('kind')!r}")
            return cn.build(kinds[c["kind"]], _int(c, "n_A"), _int(c, "n_B"))
        if "preferential_attachment" in s:
            c = s["preferential_attachment"]
            g = mx.preferential_attachment(_int(c, "n", lo=1), _int(c, "m0", lo=1), _int(c, "m", lo=1),
                                           _int(c, "seed", 0))
            return g
    except (OSError, DomainError) as exc:
        raise ScenarioError(f"snapshot {name}: {exc}") from None
    raise ScenarioError(f"snapshot {name}: needs edges, canonical or preferential_attachment")


# --- execution -------------------------------------------------------------


def _frac(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _jsonable(v):
    if isinstance(v, Fraction):
        return _frac(v)
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, (set, frozenset)):
        return sorted(_jsonable(x) for x in v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return str(v)


class Artifacts:
    """Collects output files in memory so nothing is written on failure."""

    def __init__(self, digest: str, seed: int):
        self.files: dict[str, str] = {}
        self.digest, self.seed = digest, seed

    def _csv_header(self) -> str:
        return f"# scenario_hash={self.digest} seed={self.seed}\n"

    def csv(self, name: str, header: tuple, rows) -> None:
        lines = [self._csv_header(), ",".join(header) + "\n"]
        lines += [",".join("" if c is None else str(c) for c in row) + "\n" for row in rows]
        self.files[name] = "".join(lines)

    def jsonl(self, name: str, records) -> None:
        head = json.dumps({"kind": "Header", "scenario_hash": self.digest, "seed": self.seed})
        self.files[name] = "\n".join([head, *(json.dumps(r) for r in records)]) + "\n"

    def write(self, out: Path) -> None:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(self.files.items()):
            (out / name).write_text(text)


def _topology_record(top: Topology) -> dict:
    return {"types": "".join(t.name for t in top.types), "links": [list(p) for p in top.sorted_links()]}


def run_enumerate(p: Plan, art: Artifacts, jobs: int) -> dict:
    st, params = p.settings, p.params
    rep = enumerate_stable(st["n_A"], st["n_B"], params, st["transfers"])
    labels = frozenset(cn.label_topology(e.topology) for e in rep.stable)
    violations = 0
    records = []
    for e in rep.stable:
        chk = cn.check_distance_bounds(e.topology, params, st["transfers"])
        violations += not chk.ok
        records.append({**_topology_record(e.topology), "label": cn.label_topology(e.topology),
                        "social_cost_num": e.social_cost.numerator, "social_cost_den": e.social_cost.denominator,
                        "knife_edge": e.knife_edge, "bounds_ok": chk.ok})
    art.jsonl("stable.jsonl", records)
    res = {
        "stable_set": labels, "stable_count": len(rep.stable), "connected_count": rep.connected_count,
        "min_stable_cost": rep.min_stable_cost, "max_stable_cost": rep.max_stable_cost,
        "optimum_cost": rep.optimum_cost, "pos": rep.price_of_stability, "poa": rep.price_of_anarchy,
        "knife_edge_count": rep.knife_edge_count, "bound_violations": violations,
    }
    art.csv("prices.csv", ("quantity", "value"), [(k, _frac(res[k]) if res[k] is not None else "")
                                                   for k in ("optimum_cost", "min_stable_cost", "max_stable_cost",
                                                             "pos", "poa")])
    return res


def _event_record(ev) -> dict:
    return {
        "turn": ev.turn, "act": ev.act, "kind": ev.kind,
        "pair": list(ev.pair) if ev.pair else None,
        "payment_num": ev.payment.numerator, "payment_den": ev.payment.denominator,
        "payer": ev.payer, "node": ev.node, "ptype": ev.ptype.name if ev.ptype is not None else None,
    }


def _snapshot_record(turn, ph) -> dict:
    return {
        "kind": "Snapshot", "turn": turn, "S": ph.S_size, "L": ph.L_size, "D": ph.D_size, "m_A": ph.m_A,
        "x": ph.star_center_x, "k": ph.first_linker_k, "kx": ph.kx_present, "region": ph.region.value,
        "term1": None if ph.term1 is None else _frac(ph.term1),
        "term2": None if ph.term2 is None else _frac(ph.term2),
    }


def _run_config(p: Plan, r: int) -> DynamicsConfig:
    st = p.settings
    seed = p.seed + r
    how, sched = st["schedule"]
    if how == "shuffle":
        sched = list(sched)
        random.Random(f"arrivals:{seed}").shuffle(sched)
    order = UniformRandom(seed) if st["order"] == "random" else RoundRobin()
    return DynamicsConfig(tuple(sched), rule=st["rule"], transfers=st["transfers"], preference=st["preference"],
                          turn_order=order, max_turns=st["max_turns"], seed=seed,
                          record_snapshots=st["traces"] != "none")


def _one_run(args):
    config, params = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_game(config, params)


def run_dynamics(p: Plan, art: Artifacts, jobs: int) -> dict:
    st, params = p.settings, p.params
    configs = [_run_config(p, r) for r in range(st["runs"])]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(_one_run, [(c, params) for c in configs]))
    else:
        traces = [_one_run((c, params)) for c in configs]
    rows, finals, regions = [], [], set()
    max_ratio, cost_viol, bound_viol = Fraction(0), 0, 0
    totals = {"A-A": Fraction(0), "A-B": Fraction(0), "B-B": Fraction(0)}
    max_aa, balanced = Fraction(0), True
    for r, (cfg, tr) in enumerate(zip(configs, traces)):
        top = tr.final
        n_A, n_B = len(top.type_a), len(top.type_b)
        label = cn.label_topology(top)
        finals.append(label)
        cost = social_cost(top, params)
        opt = cn.optimal_cost(n_A, n_B, params) if n_A else None
        ratio = cost.finite_part / opt if opt and not cost.unreachable_count else None
        if ratio is not None:
            max_ratio = max(max_ratio, ratio)
        if n_A:
            bound = (cn.single_act_cost_bound if st["rule"] is Rule.R2B else cn.convergence_cost_bound)(n_A, n_B, params)
            cost_viol += cost.unreachable_count > 0 or cost.finite_part > bound
        stable = top.is_connected() and (is_stable_with_transfers if st["transfers"] else is_pairwise_stable)(top, params).stable
        if stable:
            bound_viol += not cn.check_distance_bounds(top, params, st["transfers"]).ok
        regions |= {ph.region.value for _, ph in tr.snapshots}
        ts = transfer_summary(tr)
        for k in totals:
            totals[k] += ts[k]
        aa = [tr.ledger.link_payment(u, v) for u, v in top.links if u in top.type_a and v in top.type_a]
        max_aa = max([max_aa, *aa])
        balanced &= tr.ledger.balance() == 0
        rows.append((r, cfg.seed, "".join(t.name for t in cfg.arrival_schedule), label,
                     _frac(cost.finite_part) if not cost.unreachable_count else "", tr.converged_at, tr.passes,
                     tr.last_act_turn, "|".join(tr.anomalies)))
        if st["traces"] == "all" or (st["traces"] == "first" and r == 0):
            recs = [_event_record(e) for e in tr.events]
            recs += [_snapshot_record(t, ph) for t, ph in tr.snapshots]
            art.jsonl(f"trace_{r:04d}.jsonl", recs)
    art.csv("runs.csv", ("run", "seed", "schedule", "final", "social_cost", "converged_at", "passes",
                         "last_act_turn", "anomalies"), rows)
    first = traces[0].final
    res = {
        "final": finals[0], "finals": frozenset(finals), "runs": Fraction(len(traces)),
        "converged_runs": Fraction(sum(t.converged for t in traces)),
        "all_converged": all(t.converged for t in traces),
        "max_passes": Fraction(max(t.passes for t in traces)),
        "max_certified_turn": Fraction(max((t.converged_at or 0) for t in traces)),
        "max_cost_ratio": max_ratio, "final_cost": social_cost(first, params).finite_part,
        "optimal_cost": cn.optimal_cost(len(first.type_a), len(first.type_b), params) if first.type_a else None,
        "cost_bound_violations": Fraction(cost_viol), "regions": frozenset(regions),
        "bound_violations": Fraction(bound_viol),
    }
    if st["transfers"]:
        art.csv("transfers.csv", ("link_class", "total_num", "total_den"),
                [(k, v.numerator, v.denominator) for k, v in totals.items()])
        res.update({"transfers_AA": totals["A-A"], "transfers_AB": totals["A-B"], "transfers_BB": totals["B-B"],
                    "max_AA_payment": max_aa, "ledger_balanced": balanced})
    return res


def run_canonical(p: Plan, art: Artifacts, jobs: int) -> dict:
    st, params = p.settings, p.params
    n_A, n_B = st["n_A"], st["n_B"]
    k = st["line_length"] if st["line_length"] is not None else cn.poor_eq_line_length(params)
    lines = None
    if k and k >= 1 and n_B and n_B % k == 0:
        lines = cn.closed_form_cost(cn.LinesOnClique(n_B // k, k), n_A, n_B, params)
    star_top = cn.build(cn.StarOnClique(), n_A, n_B)
    fb_top = cn.build(cn.FullBipartiteOnClique(), n_A, n_B)
    check = is_stable_with_transfers if st["transfers"] else is_pairwise_stable
    prices = cn.stability_prices(n_A, n_B, params, st["transfers"], mode="closed_form")
    res = {
        "star_cost": cn.closed_form_cost(cn.StarOnClique(), n_A, n_B, params),
        "fb_cost": cn.closed_form_cost(cn.FullBipartiteOnClique(), n_A, n_B, params),
        "optimal_cost": cn.optimal_cost(n_A, n_B, params),
        "absorbed_star_cost": cn.absorbed_star_cost(n_A, n_B, params) if n_B else None,
        "lines_cost": lines, "line_length": Fraction(k),
        "pos": prices.pos, "poa_lower": prices.poa_lower,
        "pos_asymptotic": cn.pos_asymptotic(n_A, n_B, params) if n_B else None,
        "convergence_bound": cn.convergence_cost_bound(n_A, n_B, params),
        "single_act_bound": cn.single_act_cost_bound(n_A, n_B, params),
        "worst_stable_bound": cn.worst_stable_cost_bound(n_A, n_B, params),
        "star_stable": check(star_top, params).stable,
        "fb_stable": check(fb_top, params).stable,
        "loop_stable": None, "loop_feasible": None,
    }
    if st["loop_k"] is not None:
        lk = int(st["loop_k"])
        res["loop_feasible"] = cn.loop_feasible(lk, params)
        res["loop_stable"] = is_pairwise_stable(cn.build(cn.LoopExample(lk), max(n_A, 2), lk), params).stable
    art.csv("closed_forms.csv", ("quantity", "value"),
            [(k2, "" if v is None else (_frac(v) if isinstance(v, Fraction) else v)) for k2, v in res.items()])
    b = cn.distance_bounds(params, st["transfers"], n_A)
    art.csv("bounds.csv", ("bound", "value"), [
        ("any_to_B", b.b_any), ("A_A_radicand", _frac(b.a_a.radicand)), ("A_A_offset", _frac(b.a_a.offset)),
        ("A_A_floor", b.a_a.floor()), ("money_B_B", b.money_b_b), ("money_B_clique", b.money_b_clique),
    ])
    return res


def run_metrics(p: Plan, art: Artifacts, jobs: int) -> dict:
    st = p.settings
    out, rows = {}, []
    for name, g, own_core in st["snapshots"]:
        core = st["core"] if own_core is None else own_core
        if core == "type_A":
            if not isinstance(g, Topology):
                raise ScenarioError(f"snapshot {name}: core 'type_A' needs typed players")
            core = g.type_a
        elif isinstance(core, str):
            core = mx.read_node_set(Path(p.data.get("_base", ".")) / core)
        m = mx.snapshot_metrics(g, core, st["k"])
        out[name] = m
        rows += mx.metric_rows(name, m)
    art.csv("metrics.csv", mx.METRIC_FIELDS, rows)
    return {"metrics": out, "snapshots": Fraction(len(out))}


RUNNERS = {"enumerate": run_enumerate, "dynamics": run_dynamics, "monetary": run_dynamics,
           "canonical": run_canonical, "metrics": run_metrics}


@dataclass
class Outcome:
    name: str
    status: int
    lines: list[str]
    out_dir: str | None


def execute(path, overrides=(), out_root=None, jobs: int = 1) -> Outcome:
    """Run one scenario file and write its artifacts; never raises for scenario problems."""
    name = Path(path).stem
    try:
        data = load_scenario(path, overrides)
        name = str(data["name"])
        p = plan(data)
        art = Artifacts(p.digest, p.seed)
        results = RUNNERS[p.mode](p, art, jobs)
    except (ScenarioError, DomainError) as exc:
        return Outcome(name, EXIT_BAD, [f"ERROR {name}: {exc}"], None)
    lines, ok = [], True
    for text, tree in p.assertions:
        try:
            passed = bool(evaluate(tree, results))
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            passed = False
            text = f"{text}  ({type(exc).__name__}: {exc})"
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {text}")
    summary = {
        "scenario": name, "scenario_hash": p.digest, "seed": p.seed, "mode": p.mode,
        "results": _jsonable(results),
        "assertions": [{"expr": t, "passed": l.startswith("PASS")} for (t, _), l in zip(p.assertions, lines)],
        "status": EXIT_OK if ok else EXIT_ASSERT,
    }
    art.files["summary.json"] = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    root = Path(out_root or os.environ.get(OUT_ENV) or "netform-out")
    out = root / re.sub(r"[^A-Za-z0-9_.-]+", "_", name)
    art.write(out)
    return Outcome(name, EXIT_OK if ok else EXIT_ASSERT, lines, str(out))


def _execute_job(args):
    return execute(*args)


@click.group()
def main():
    """Network formation game toolkit."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path())
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override a scenario key (dotted path).")
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1), help="Worker processes.")
@click.option("--out", "out_root", default=None, type=click.Path(file_okay=False),
              help=f"Output root (default ${OUT_ENV} or ./netform-out).")
def run(files, overrides, jobs, out_root):
    """Run scenario FILES and check their assertions."""
    if len(files) > 1 and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_execute_job, [(f, overrides, out_root, 1) for f in files]))
    else:
        outcomes = [execute(f, overrides, out_root, jobs) for f in files]
    for o in outcomes:
        for line in o.lines:
            click.echo(line, err=line.startswith("ERROR"))
        if o.out_dir and not o.lines:
            click.echo(f"DONE {o.name} -> {o.out_dir}")
    sys.exit(max(o.status for o in outcomes))


if __name__ == "__main__":
    main()
