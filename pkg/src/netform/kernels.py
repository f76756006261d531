"""Kernel dispatch: the compiled extension when available, else pure Python.

Set ``NETFORM_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
active implementation.  Graphs above 64 nodes always use the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BASIC = _pykernels.BASIC
TRANSFER = _pykernels.TRANSFER
BASIC_EDGE = _pykernels.BASIC_EDGE
TRANSFER_EDGE = _pykernels.TRANSFER_EDGE

_compiled = None
if os.environ.get("NETFORM_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_LIMIT = 64


def _pick(n: int):
    return _compiled if _compiled is not None and n <= _LIMIT else _pykernels


def bfs_hops(adj, n: int, src: int) -> list[int]:
    return _pick(n).bfs_hops(adj, n, src)


def dist_sums(adj, n: int, src: int, a_mask: int) -> tuple[int, int, int]:
    return _pick(n).dist_sums(adj, n, src, a_mask)


def all_dist_sums(adj, n: int, a_mask: int) -> list[tuple[int, int, int]]:
    return _pick(n).all_dist_sums(adj, n, a_mask)


def toggle_sums(adj, n: int, i: int, a_mask: int):
    return _pick(n).toggle_sums(adj, n, i, a_mask)


def stability_flags(adj, n: int, a_mask: int, cA: int, cB: int, A: int, unit: int, want: int = BASIC | TRANSFER) -> int:
    return _pick(n).stability_flags(adj, n, a_mask, cA, cB, A, unit, want)


def scan_graphs(n: int, a_mask: int, cA: int, cB: int, A: int, unit: int, want: int = BASIC | TRANSFER):
    return _pick(n).scan_graphs(n, a_mask, cA, cB, A, unit, want)
