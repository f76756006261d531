"""Pure-Python distance kernels (reference implementation and fallback).

Graphs are given as a sequence of adjacency bitmasks.  Costs are handled in
integer units: every rational game parameter is pre-multiplied by a common
denominator ``unit`` so that a player's scaled cost is
``deg * c + A * sumA + unit * sumB``.
"""

from __future__ import annotations


def bfs_hops(adj, n, src):
    dist = [-1] * n
    dist[src] = 0
    seen = 1 << src
    frontier = seen
    d = 0
    while frontier:
        d += 1
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        nxt &= ~seen
        seen |= nxt
        f = nxt
        while f:
            low = f & -f
            dist[low.bit_length() - 1] = d
            f ^= low
        frontier = nxt
    return dist


def dist_sums(adj, n, src, a_mask):
    """Return ``(sum of hops to type-A, sum of hops to type-B, unreachable count)``."""
    seen = 1 << src
    frontier = seen
    d = sa = sb = 0
    while frontier:
        d += 1
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        nxt &= ~seen
        seen |= nxt
        a = (nxt & a_mask).bit_count()
        sa += d * a
        sb += d * (nxt.bit_count() - a)
        frontier = nxt
    return sa, sb, n - seen.bit_count()


def all_dist_sums(adj, n, a_mask):
    return [dist_sums(adj, n, s, a_mask) for s in range(n)]


def toggle_sums(adj, n, i, a_mask):
    """Distance sums after toggling each link ``(i, j)``.

    Returns two lists indexed by ``j``: sums seen from ``i`` and sums seen
    from ``j`` in the toggled graph.  Entry ``i`` holds the untoggled sums
    from ``i`` in both lists.
    """
    rows = list(adj)
    own = [None] * n
    other = [None] * n
    base = dist_sums(rows, n, i, a_mask)
    own[i] = other[i] = base
    bi = 1 << i
    for j in range(n):
        if j == i:
            continue
        bj = 1 << j
        rows[i] ^= bj
        rows[j] ^= bi
        own[j] = dist_sums(rows, n, i, a_mask)
        other[j] = dist_sums(rows, n, j, a_mask)
        rows[i] ^= bj
        rows[j] ^= bi
    return own, other


BASIC = 1
TRANSFER = 2
BASIC_EDGE = 4
TRANSFER_EDGE = 8


def _scaled(sums, deg, c, A, unit):
    return deg * c + A * sums[0] + unit * sums[1]


def stability_flags(adj, n, a_mask, cA, cB, A, unit, want=BASIC | TRANSFER):
    """Classify a connected graph.

    Bit ``BASIC`` / ``TRANSFER`` is set when the graph is stable under the
    one-sided / summed-delta rule; the ``*_EDGE`` bits flag that some
    deciding delta was exactly zero.
    """
    rows = list(adj)
    cost = []
    for u in range(n):
        cu = cA if a_mask >> u & 1 else cB
        cost.append(_scaled(dist_sums(rows, n, u, a_mask), rows[u].bit_count(), cu, A, unit))
    basic = bool(want & BASIC)
    transfer = bool(want & TRANSFER)
    edge = 0
    for u in range(n):
        cu = cA if a_mask >> u & 1 else cB
        bu = 1 << u
        for v in range(u + 1, n):
            cv = cA if a_mask >> v & 1 else cB
            bv = 1 << v
            present = rows[u] & bv
            rows[u] ^= bv
            rows[v] ^= bu
            su = dist_sums(rows, n, u, a_mask)
            sv = dist_sums(rows, n, v, a_mask)
            rows[u] ^= bv
            rows[v] ^= bu
            if present:
                if su[2] or sv[2]:
                    continue  # removing a bridge is never profitable
                du = _scaled(su, rows[u].bit_count() - 1, cu, A, unit) - cost[u]
                dv = _scaled(sv, rows[v].bit_count() - 1, cv, A, unit) - cost[v]
                if basic:
                    if du < 0 or dv < 0:
                        basic = False
                    elif du == 0 or dv == 0:
                        edge |= BASIC_EDGE
            else:
                du = _scaled(su, rows[u].bit_count() + 1, cu, A, unit) - cost[u]
                dv = _scaled(sv, rows[v].bit_count() + 1, cv, A, unit) - cost[v]
                if basic:
                    if du < 0 and dv < 0:
                        basic = False
                    elif (du == 0 and dv <= 0) or (dv == 0 and du <= 0):
                        edge |= BASIC_EDGE
            if transfer:
                s = du + dv
                if s < 0:
                    transfer = False
                elif s == 0:
                    edge |= TRANSFER_EDGE
            if not basic and not transfer:
                return 0
    flags = (BASIC if basic else 0) | (TRANSFER if transfer else 0)
    if basic:
        flags |= edge & BASIC_EDGE
    if transfer:
        flags |= edge & TRANSFER_EDGE
    return flags


def scan_graphs(n, a_mask, cA, cB, A, unit, want=BASIC | TRANSFER):
    """Scan every labeled graph on ``n`` nodes.

    Bit ``e`` of a mask selects the ``e``-th pair in lexicographic order.
    Returns ``(n_connected, opt_cost, opt_masks, records)`` where records
    are ``(mask, scaled social cost, flags)`` for graphs stable under at
    least one requested rule.
    """
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    n_conn = 0
    opt = None
    opt_masks = []
    records = []
    full = (1 << n) - 1
    for mask in range(1 << len(pairs)):
        rows = [0] * n
        m = mask
        e = 0
        while m:
            if m & 1:
                u, v = pairs[e]
                rows[u] |= 1 << v
                rows[v] |= 1 << u
            m >>= 1
            e += 1
        # connectivity from node 0
        seen = 1
        frontier = 1
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= rows[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~seen
            seen |= nxt
        if n and seen != full:
            continue
        n_conn += 1
        social = 0
        for u in range(n):
            cu = cA if a_mask >> u & 1 else cB
            social += _scaled(dist_sums(rows, n, u, a_mask), rows[u].bit_count(), cu, A, unit)
        if opt is None or social < opt:
            opt = social
            opt_masks = [mask]
        elif social == opt:
            opt_masks.append(mask)
        flags = stability_flags(rows, n, a_mask, cA, cB, A, unit, want)
        if flags:
            records.append((mask, social, flags))
    return n_conn, opt, opt_masks, records
