import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from netform.cli import EXIT_ASSERT, EXIT_BAD, EXIT_OK, ScenarioError, compile_assertion, evaluate, execute, main

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


ENUM = """
name: enum
mode: enumerate
params: {c_A: 1/2, c_B: 1/2, A: 2}
enumerate: {n_A: 0, n_B: 3}
assertions:
  - stable_set == {K3}
"""


def test_enumerate_scenario_passes(tmp_path):
    out = execute(write(tmp_path, "e.yaml", ENUM), out_root=tmp_path / "out")
    assert out.status == EXIT_OK and out.lines == ["PASS enum: stable_set == {K3}"]
    summary = json.loads((tmp_path / "out" / "enum" / "summary.json").read_text())
    assert summary["results"]["stable_set"] == ["K3"] and summary["seed"] == 0
    first = (tmp_path / "out" / "enum" / "stable.jsonl").read_text().splitlines()[0]
    assert json.loads(first)["scenario_hash"] == summary["scenario_hash"]


def test_dynamics_scenario_passes(tmp_path):
    out = execute(SCEN / "star_convergence.yaml", out_root=tmp_path)
    assert out.status == EXIT_OK


def test_failing_assertion_exit_one(tmp_path):
    out = execute(write(tmp_path, "e.yaml", ENUM.replace("{K3}", "{K4}")), out_root=tmp_path / "o")
    assert out.status == EXIT_ASSERT and out.lines[0].startswith("FAIL")


@pytest.mark.parametrize("text", [
    "mode: [",
    "name: x\nmode: nope\n",
    "name: x\nmode: enumerate\nparams: {c_A: 3, c_B: 2, A: 4}\nenumerate: {n_A: 0, n_B: 3}\n",
    "name: x\nmode: enumerate\nparams: {c_A: 1, c_B: 2, A: 4}\nenumerate: {n_A: 0, n_B: 30}\n",
    "name: x\nmode: enumerate\nparams: {c_A: 1, c_B: 2, A: 4}\nenumerate: {n_A: 0, n_B: 3}\nassertions: [bogus_key == 1]\n",
    "name: x\nmode: enumerate\nparams: {c_A: 1, c_B: 2, A: 4}\nenumerate: {n_A: 0, n_B: 3}\nassertions: ['__import__(1)']\n",
    "name: x\nmode: monetary\nparams: {c_A: 1, c_B: 2, A: 4}\nmonetary: {schedule: AB}\n",
])
def test_malformed_exit_two_without_artifacts(tmp_path, text):
    out_root = tmp_path / "out"
    out = execute(write(tmp_path, "bad.yaml", text), out_root=out_root)
    assert out.status == EXIT_BAD
    assert not out_root.exists()


def test_overrides(tmp_path):
    p = write(tmp_path, "e.yaml", ENUM)
    assert execute(p, ["enumerate.n_B=4"], out_root=tmp_path / "a").status == EXIT_ASSERT
    assert execute(p, ["nothing.here=1"], out_root=tmp_path / "b").status == EXIT_BAD


def test_byte_identical_reruns(tmp_path):
    for d in ("r1", "r2"):
        execute(SCEN / "monetary_full_bipartite.yaml", out_root=tmp_path / d)
    a, b = tmp_path / "r1", tmp_path / "r2"
    files = sorted(x.relative_to(a) for x in a.rglob("*") if x.is_file())
    assert files
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_trace_field_order(tmp_path):
    execute(SCEN / "absorbed_star.yaml", out_root=tmp_path)
    lines = (tmp_path / "absorbed-star" / "trace_0000.jsonl").read_text().splitlines()
    header = json.loads(lines[0])
    assert header["kind"] == "Header" and "scenario_hash" in header
    ev = json.loads(lines[1])
    assert list(ev)[:6] == ["turn", "act", "kind", "pair", "payment_num", "payment_den"]
    assert any(json.loads(l)["kind"] == "Snapshot" for l in lines)


def test_cli_entry_point_and_env(tmp_path, monkeypatch):
    monkeypatch.setenv("NETFORM_OUT", str(tmp_path / "envout"))
    res = CliRunner().invoke(main, ["run", str(write(tmp_path, "e.yaml", ENUM))])
    assert res.exit_code == 0 and "PASS enum" in res.output
    assert (tmp_path / "envout" / "enum" / "summary.json").exists()
    res = CliRunner().invoke(main, ["run", str(write(tmp_path, "b.yaml", "mode: ["))])
    assert res.exit_code == 2


def test_parallel_jobs_same_outputs(tmp_path):
    files = [str(SCEN / "clique_lemma.yaml"), str(SCEN / "loop_example.yaml")]
    r1 = CliRunner().invoke(main, ["run", *files, "--out", str(tmp_path / "s")])
    r2 = CliRunner().invoke(main, ["run", *files, "--jobs", "2", "--out", str(tmp_path / "p")])
    assert r1.exit_code == r2.exit_code == 0
    for f in (tmp_path / "s").rglob("*.csv"):
        assert f.read_bytes() == (tmp_path / "p" / f.relative_to(tmp_path / "s")).read_bytes()


def test_assertion_language():
    keys = {"x", "s"}
    ctx = {"x": 3, "s": frozenset({"K3"})}
    assert evaluate(compile_assertion("x == 6/2 and K3 in s", keys), ctx)
    assert evaluate(compile_assertion("1 < x <= 3", keys), ctx)
    assert not evaluate(compile_assertion("not x", keys), ctx)
    for bad in ("x.__class__", "lambda: 1", "open('f')", "y == 1"):
        with pytest.raises(ScenarioError):
            compile_assertion(bad, keys)
