"""The compiled kernels and the pure-Python fallback must agree bit for bit."""

import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netform import _pykernels, kernels
from strategies import topologies

compiled = pytest.importorskip("netform._kernels")


@settings(max_examples=200, deadline=None)
@given(topologies(max_n=12), st.data())
def test_distance_kernels_agree(top, data):
    n, adj, am = top.n, list(top.adj), top.a_mask
    s = data.draw(st.integers(0, n - 1))
    assert compiled.bfs_hops(adj, n, s) == _pykernels.bfs_hops(adj, n, s)
    assert tuple(compiled.dist_sums(adj, n, s, am)) == tuple(_pykernels.dist_sums(adj, n, s, am))
    assert [tuple(x) for x in compiled.all_dist_sums(adj, n, am)] == [tuple(x) for x in _pykernels.all_dist_sums(adj, n, am)]
    a, b = compiled.toggle_sums(adj, n, s, am), _pykernels.toggle_sums(adj, n, s, am)
    assert [[tuple(x) for x in part] for part in a] == [[tuple(x) for x in part] for part in b]


@settings(max_examples=200, deadline=None)
@given(topologies(max_n=9), st.integers(0, 12), st.integers(0, 12), st.integers(3, 12), st.integers(1, 4))
def test_stability_flags_agree(top, ca, extra, A, unit):
    n, adj, am = top.n, list(top.adj), top.a_mask
    cb = ca + extra
    assert compiled.stability_flags(adj, n, am, ca, cb, A, unit, 3) == _pykernels.stability_flags(adj, n, am, ca, cb, A, unit, 3)


@pytest.mark.parametrize("n,a_mask", [(4, 0), (5, 0b11), (5, 0b1)])
def test_scan_agrees(n, a_mask):
    args = (n, a_mask, 3, 5, 8, 2, kernels.BASIC | kernels.TRANSFER)
    assert compiled.scan_graphs(*args) == _pykernels.scan_graphs(*args)


def test_large_graph_kernels_agree():
    n = 64
    adj = [0] * n
    for v in range(1, n):
        u = (v * 37) % v
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    am = (1 << 6) - 1
    assert compiled.all_dist_sums(adj, n, am) == _pykernels.all_dist_sums(adj, n, am)


def test_backend_reported_and_env_switch():
    forced = os.environ.get("NETFORM_PURE_PYTHON", "") not in ("", "0")
    assert kernels.BACKEND == ("python" if forced else "cython")
    env = dict(os.environ, NETFORM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from netform import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
