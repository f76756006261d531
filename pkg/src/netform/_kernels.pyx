# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance kernels for graphs of at most 64 nodes.

Same interface and results as ``_pykernels``.
"""

from libc.stdint cimport uint64_t, int64_t

cdef extern from * nogil:
    int popcount64 "__builtin_popcountll"(unsigned long long)
    int ctz64 "__builtin_ctzll"(unsigned long long)

cdef enum:
    MAXN = 64
    F_BASIC = 1
    F_TRANSFER = 2
    F_BASIC_EDGE = 4
    F_TRANSFER_EDGE = 8

BASIC = F_BASIC
TRANSFER = F_TRANSFER
BASIC_EDGE = F_BASIC_EDGE
TRANSFER_EDGE = F_TRANSFER_EDGE


cdef inline uint64_t _bit(int i) nogil:
    return (<uint64_t>1) << i


cdef int _load(object adj, int n, uint64_t* rows) except -1:
    if n > MAXN:
        raise ValueError("compiled kernels support at most 64 nodes")
    cdef int i
    for i in range(n):
        rows[i] = <uint64_t>adj[i]
    return 0


cdef void _sums(const uint64_t* rows, int n, int src, uint64_t amask,
                int64_t* sa, int64_t* sb, int* unreach) nogil:
    cdef uint64_t seen = _bit(src)
    cdef uint64_t frontier = seen
    cdef uint64_t nxt, f
    cdef int64_t d = 0, a_sum = 0, b_sum = 0
    cdef int a
    while frontier:
        d += 1
        nxt = 0
        f = frontier
        while f:
            nxt |= rows[ctz64(f)]
            f &= f - 1
        nxt &= ~seen
        seen |= nxt
        a = popcount64(nxt & amask)
        a_sum += d * a
        b_sum += d * (popcount64(nxt) - a)
        frontier = nxt
    sa[0] = a_sum
    sb[0] = b_sum
    unreach[0] = n - popcount64(seen)


def bfs_hops(adj, int n, int src):
    cdef uint64_t rows[MAXN]
    _load(adj, n, rows)
    dist = [-1] * n
    dist[src] = 0
    cdef uint64_t seen = _bit(src)
    cdef uint64_t frontier = seen
    cdef uint64_t nxt, f
    cdef int d = 0
    while frontier:
        d += 1
        nxt = 0
        f = frontier
        while f:
            nxt |= rows[ctz64(f)]
            f &= f - 1
        nxt &= ~seen
        seen |= nxt
        f = nxt
        while f:
            dist[ctz64(f)] = d
            f &= f - 1
        frontier = nxt
    return dist


def dist_sums(adj, int n, int src, uint64_t a_mask):
    cdef uint64_t rows[MAXN]
    cdef int64_t sa, sb
    cdef int un
    _load(adj, n, rows)
    _sums(rows, n, src, a_mask, &sa, &sb, &un)
    return sa, sb, un


def all_dist_sums(adj, int n, uint64_t a_mask):
    cdef uint64_t rows[MAXN]
    cdef int64_t sa, sb
    cdef int un, s
    _load(adj, n, rows)
    out = []
    for s in range(n):
        _sums(rows, n, s, a_mask, &sa, &sb, &un)
        out.append((sa, sb, un))
    return out


def toggle_sums(adj, int n, int i, uint64_t a_mask):
    cdef uint64_t rows[MAXN]
    cdef int64_t sa, sb
    cdef int un, j
    _load(adj, n, rows)
    own = [None] * n
    other = [None] * n
    _sums(rows, n, i, a_mask, &sa, &sb, &un)
    base = (sa, sb, un)
    own[i] = base
    other[i] = base
    for j in range(n):
        if j == i:
            continue
        rows[i] ^= _bit(j)
        rows[j] ^= _bit(i)
        _sums(rows, n, i, a_mask, &sa, &sb, &un)
        own[j] = (sa, sb, un)
        _sums(rows, n, j, a_mask, &sa, &sb, &un)
        other[j] = (sa, sb, un)
        rows[i] ^= _bit(j)
        rows[j] ^= _bit(i)
    return own, other


cdef inline int64_t _scaled(int64_t sa, int64_t sb, int deg, int64_t c,
                            int64_t A, int64_t unit) nogil:
    return deg * c + A * sa + unit * sb


cdef int _flags(uint64_t* rows, int n, uint64_t amask, int64_t cA, int64_t cB,
                int64_t A, int64_t unit, int want) nogil:
    cdef int64_t cost[MAXN]
    cdef int64_t sa, sb, du, dv, s, cu, cv
    cdef int un, unu, unv, u, v, degu, degv
    cdef bint basic = (want & F_BASIC) != 0
    cdef bint transfer = (want & F_TRANSFER) != 0
    cdef bint present
    cdef int edge = 0
    cdef int64_t sau, sbu
    for u in range(n):
        cu = cA if (amask >> u) & 1 else cB
        _sums(rows, n, u, amask, &sa, &sb, &un)
        cost[u] = _scaled(sa, sb, popcount64(rows[u]), cu, A, unit)
    for u in range(n):
        cu = cA if (amask >> u) & 1 else cB
        degu = popcount64(rows[u])
        for v in range(u + 1, n):
            cv = cA if (amask >> v) & 1 else cB
            degv = popcount64(rows[v])
            present = (rows[u] >> v) & 1
            rows[u] ^= _bit(v)
            rows[v] ^= _bit(u)
            _sums(rows, n, u, amask, &sau, &sbu, &unu)
            _sums(rows, n, v, amask, &sa, &sb, &unv)
            rows[u] ^= _bit(v)
            rows[v] ^= _bit(u)
            if present:
                if unu or unv:
                    continue
                du = _scaled(sau, sbu, degu - 1, cu, A, unit) - cost[u]
                dv = _scaled(sa, sb, degv - 1, cv, A, unit) - cost[v]
                if basic:
                    if du < 0 or dv < 0:
                        basic = False
                    elif du == 0 or dv == 0:
                        edge |= F_BASIC_EDGE
            else:
                du = _scaled(sau, sbu, degu + 1, cu, A, unit) - cost[u]
                dv = _scaled(sa, sb, degv + 1, cv, A, unit) - cost[v]
                if basic:
                    if du < 0 and dv < 0:
                        basic = False
                    elif (du == 0 and dv <= 0) or (dv == 0 and du <= 0):
                        edge |= F_BASIC_EDGE
            if transfer:
                s = du + dv
                if s < 0:
                    transfer = False
                elif s == 0:
                    edge |= F_TRANSFER_EDGE
            if not basic and not transfer:
                return 0
    cdef int flags = 0
    if basic:
        flags |= F_BASIC | (edge & F_BASIC_EDGE)
    if transfer:
        flags |= F_TRANSFER | (edge & F_TRANSFER_EDGE)
    return flags


def stability_flags(adj, int n, uint64_t a_mask, int64_t cA, int64_t cB,
                    int64_t A, int64_t unit, int want=F_BASIC | F_TRANSFER):
    cdef uint64_t rows[MAXN]
    _load(adj, n, rows)
    return _flags(rows, n, a_mask, cA, cB, A, unit, want)


def scan_graphs(int n, uint64_t a_mask, int64_t cA, int64_t cB, int64_t A,
                int64_t unit, int want=F_BASIC | F_TRANSFER):
    if n > 10:
        raise ValueError("graph scan is limited to 10 nodes")
    cdef int pu[45]
    cdef int pv[45]
    cdef int npairs = 0, u, v, e, un, flags
    for u in range(n):
        for v in range(u + 1, n):
            pu[npairs] = u
            pv[npairs] = v
            npairs += 1
    cdef uint64_t rows[MAXN]
    cdef uint64_t full = (_bit(n) - 1) if n < 64 else <uint64_t>(-1)
    cdef uint64_t mask, m, seen, frontier, nxt, f
    cdef uint64_t total = (<uint64_t>1) << npairs
    cdef int64_t social, sa, sb, cu
    cdef int64_t opt = 0
    cdef bint have_opt = False
    cdef long long n_conn = 0
    opt_masks = []
    records = []
    mask = 0
    while mask < total:
        for u in range(n):
            rows[u] = 0
        m = mask
        e = 0
        while m:
            if m & 1:
                rows[pu[e]] |= _bit(pv[e])
                rows[pv[e]] |= _bit(pu[e])
            m >>= 1
            e += 1
        seen = 1
        frontier = 1
        while frontier:
            nxt = 0
            f = frontier
            while f:
                nxt |= rows[ctz64(f)]
                f &= f - 1
            frontier = nxt & ~seen
            seen |= nxt
        if n and seen != full:
            mask += 1
            continue
        n_conn += 1
        social = 0
        for u in range(n):
            cu = cA if (a_mask >> u) & 1 else cB
            _sums(rows, n, u, a_mask, &sa, &sb, &un)
            social += _scaled(sa, sb, popcount64(rows[u]), cu, A, unit)
        if not have_opt or social < opt:
            opt = social
            have_opt = True
            opt_masks = [mask]
        elif social == opt:
            opt_masks.append(mask)
        flags = _flags(rows, n, a_mask, cA, cB, A, unit, want)
        if flags:
            records.append((mask, social, flags))
        mask += 1
    return n_conn, (opt if have_opt else None), opt_masks, records
