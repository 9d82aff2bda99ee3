# cython: language_level=3
"""Compiled packing kernels; behaviour matches ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport powl, fabsl

cnp.import_array()

ctypedef long long i64

DEF P_SS = 0
DEF P_SSD = 1
DEF P_SRS_INT = 2
DEF P_SRS_FLT = 3
DEF P_SINF = 4
DEF P_SMINH = 5
DEF P_SMAXH = 6
DEF P_PERFECT = 7
DEF P_WSS_INT = 8
DEF P_WSS_FLT = 9
DEF P_BF = 10


cdef struct Params:
    int code
    i64 B
    const unsigned char* dmask
    const i64* wint
    const double* wflt
    i64 r_int
    double r_flt
    double margin


cdef inline i64 _cnt(const i64* c, i64 B, i64 x) noexcept nogil:
    return 0 if x >= B else c[x]


cdef i64 _choose_ss(const i64* c, i64 B, i64 s, const unsigned char* dmask) noexcept nogil:
    cdef i64 h, v, best = 0, best_h = -1
    h = B - s
    while h > 0:
        if c[h] != 0 and not (dmask != NULL and h + s < B and dmask[h + s]):
            v = 1 - 2 * c[h]
            if h + s < B:
                v += 2 * c[h + s] + 1
            if best_h < 0 or v < best:
                best = v
                best_h = h
        h -= 1
    if dmask != NULL and s < B and dmask[s]:
        return 0 if best_h < 0 else best_h
    v = 2 * c[s] + 1 if s < B else 0
    if best_h < 0 or v < best:
        return 0
    return best_h


cdef inline i64 _ipow(i64 x, i64 r) noexcept nogil:
    cdef i64 out = 1
    while r > 0:
        out *= x
        r -= 1
    return out


cdef i64 _choose_srs_int(const i64* c, i64 B, i64 s, i64 r) noexcept nogil:
    cdef i64 h, v, cur = 0, cur_h = 0, best
    cdef bint found = False
    best = _ipow(c[s] + 1, r) - _ipow(c[s], r) if s < B else 0
    h = B - s
    while h > 0:
        if c[h] != 0:
            v = _ipow(c[h] - 1, r) - _ipow(c[h], r)
            if h + s < B:
                v += _ipow(c[h + s] + 1, r) - _ipow(c[h + s], r)
            if not found or v < cur:
                cur = v
                cur_h = h
                found = True
        h -= 1
    if found and cur <= best:
        return cur_h
    return 0


cdef inline bint _better(long double v, long double best, long double margin) noexcept nogil:
    cdef long double scale = 1.0
    if fabsl(v) > scale:
        scale = fabsl(v)
    if fabsl(best) > scale:
        scale = fabsl(best)
    return v < best - margin * scale


cdef i64 _choose_srs_flt(const i64* c, i64 B, i64 s, long double r, long double margin) noexcept nogil:
    cdef i64 h, cur_h = 0
    cdef long double v, cur = 0.0, v0
    cdef bint found = False
    h = B - s
    while h > 0:
        if c[h] != 0:
            v = powl(<long double>(c[h] - 1), r) - powl(<long double>c[h], r)
            if h + s < B:
                v = v + (powl(<long double>(c[h + s] + 1), r) - powl(<long double>c[h + s], r))
            if not found or _better(v, cur, margin):
                cur = v
                cur_h = h
                found = True
        h -= 1
    if s < B:
        v0 = powl(<long double>(c[s] + 1), r) - powl(<long double>c[s], r)
    else:
        v0 = 0.0
    if not found or _better(v0, cur, margin):
        return 0
    return cur_h


cdef i64 _choose_wss_int(const i64* c, i64 B, i64 s, const i64* w) noexcept nogil:
    cdef i64 h, v, cur = 0, cur_h = 0, v0
    cdef bint found = False
    h = B - s
    while h > 0:
        if c[h] != 0:
            v = w[h] * (1 - 2 * c[h])
            if h + s < B:
                v += w[h + s] * (2 * c[h + s] + 1)
            if not found or v < cur:
                cur = v
                cur_h = h
                found = True
        h -= 1
    v0 = w[s] * (2 * c[s] + 1) if s < B else 0
    if not found or v0 < cur:
        return 0
    return cur_h


cdef i64 _choose_wss_flt(const i64* c, i64 B, i64 s, const double* w, long double margin) noexcept nogil:
    cdef i64 h, cur_h = 0
    cdef long double v, cur = 0.0, v0
    cdef bint found = False
    h = B - s
    while h > 0:
        if c[h] != 0:
            v = (<long double>w[h]) * (<long double>(1 - 2 * c[h]))
            if h + s < B:
                v = v + (<long double>w[h + s]) * (<long double>(2 * c[h + s] + 1))
            if not found or _better(v, cur, margin):
                cur = v
                cur_h = h
                found = True
        h -= 1
    if s < B:
        v0 = (<long double>w[s]) * (<long double>(2 * c[s] + 1))
    else:
        v0 = 0.0
    if not found or _better(v0, cur, margin):
        return 0
    return cur_h


cdef i64 _choose_sminh(const i64* c, i64 B, i64 s) noexcept nogil:
    cdef i64 h, v, best = 0, best_h = -1
    h = B - s
    while h > 0:
        if c[h] != 0:
            v = _cnt(c, B, h + s)
            if best_h < 0 or v < best:
                best = v
                best_h = h
        h -= 1
    if best_h < 0 or _cnt(c, B, s) < best:
        return 0
    return best_h


cdef i64 _choose_sinf(const i64* c, i64 B, i64 s) noexcept nogil:
    cdef i64 h, best = -1, best_h = -1
    h = B - s
    while h > 0:
        if c[h] > 0 and c[h] > _cnt(c, B, h + s) and c[h] > best:
            best = c[h]
            best_h = h
        h -= 1
    if best_h >= 0:
        return best_h
    return _choose_sminh(c, B, s)


cdef i64 _choose_smaxh(const i64* c, i64 B, i64 s) noexcept nogil:
    cdef i64 h, best = 0, best_h = 0
    h = B - s
    while h > 0:
        if c[h] > best:
            best = c[h]
            best_h = h
        h -= 1
    return best_h


cdef i64 _choose_bf(const i64* c, i64 B, i64 s) noexcept nogil:
    cdef i64 h = B - s
    while h > 0:
        if c[h] > 0:
            return h
        h -= 1
    return 0


cdef i64 _choose(const i64* c, i64 s, Params* p) noexcept nogil:
    cdef int code = p.code
    cdef i64 B = p.B
    if code == P_SS:
        return _choose_ss(c, B, s, NULL)
    if code == P_SSD:
        return _choose_ss(c, B, s, p.dmask)
    if code == P_PERFECT:
        if s < B and c[B - s] > 0:
            return B - s
        return _choose_ss(c, B, s, NULL)
    if code == P_SRS_INT:
        return _choose_srs_int(c, B, s, p.r_int)
    if code == P_SRS_FLT:
        return _choose_srs_flt(c, B, s, <long double>p.r_flt, <long double>p.margin)
    if code == P_SINF:
        return _choose_sinf(c, B, s)
    if code == P_SMINH:
        return _choose_sminh(c, B, s)
    if code == P_SMAXH:
        return _choose_smaxh(c, B, s)
    if code == P_WSS_INT:
        return _choose_wss_int(c, B, s, p.wint)
    if code == P_WSS_FLT:
        return _choose_wss_flt(c, B, s, p.wflt, <long double>p.margin)
    if code == P_BF:
        return _choose_bf(c, B, s)
    return -1


# -- bucket structure (mirrors buckets.DeltaBucketList) -----------------------

cdef struct Buckets:
    i64 B
    i64* lev_b
    i64* lev_next
    i64* lev_prev
    i64* b_key
    i64* b_head
    i64* b_next
    i64* b_prev
    i64* meta
    const unsigned char* dmask


cdef inline i64 _bk_key(const i64* c, i64 B, i64 h) noexcept nogil:
    cdef i64 up = -1 if h + 1 == B else 2 * c[h + 1]
    cdef i64 down = 1 if h == 0 else 2 * c[h]
    return up - down


cdef inline bint _bk_member(Buckets* bk, const i64* c, i64 h) noexcept nogil:
    if bk.dmask[h + 1]:
        return False
    return h == 0 or c[h] > 0


cdef inline i64 _bk_new(Buckets* bk, i64 k) noexcept nogil:
    cdef i64 b = bk.meta[1]
    bk.meta[1] = bk.b_next[b]
    bk.b_key[b] = k
    bk.b_head[b] = -1
    bk.b_next[b] = -1
    bk.b_prev[b] = -1
    return b


cdef i64 _bk_unlink(Buckets* bk, i64 x) noexcept nogil:
    cdef i64 b = bk.lev_b[x]
    cdef i64 p = bk.lev_prev[x]
    cdef i64 n = bk.lev_next[x]
    cdef i64 bp, bn
    if p >= 0:
        bk.lev_next[p] = n
    else:
        bk.b_head[b] = n
    if n >= 0:
        bk.lev_prev[n] = p
    bk.lev_b[x] = -1
    bk.lev_next[x] = -1
    bk.lev_prev[x] = -1
    if bk.b_head[b] >= 0:
        return b
    bp = bk.b_prev[b]
    bn = bk.b_next[b]
    if bp >= 0:
        bk.b_next[bp] = bn
    else:
        bk.meta[0] = bn
    if bn >= 0:
        bk.b_prev[bn] = bp
    bk.b_next[b] = bk.meta[1]
    bk.meta[1] = b
    return bp if bp >= 0 else bn


cdef inline void _bk_push(Buckets* bk, i64 b, i64 x) noexcept nogil:
    cdef i64 head = bk.b_head[b]
    bk.lev_next[x] = head
    bk.lev_prev[x] = -1
    if head >= 0:
        bk.lev_prev[head] = x
    bk.b_head[b] = x
    bk.lev_b[x] = b


cdef void _bk_insert(Buckets* bk, i64 x, i64 k, i64 hint) noexcept nogil:
    cdef i64 b = bk.meta[0] if hint < 0 else hint
    cdef i64 nb, n, p
    if b < 0:
        nb = _bk_new(bk, k)
        bk.meta[0] = nb
        _bk_push(bk, nb, x)
        return
    if bk.b_key[b] <= k:
        while bk.b_next[b] >= 0 and bk.b_key[bk.b_next[b]] <= k:
            b = bk.b_next[b]
        if bk.b_key[b] == k:
            _bk_push(bk, b, x)
            return
        nb = _bk_new(bk, k)
        n = bk.b_next[b]
        bk.b_prev[nb] = b
        bk.b_next[nb] = n
        bk.b_next[b] = nb
        if n >= 0:
            bk.b_prev[n] = nb
    else:
        while bk.b_prev[b] >= 0 and bk.b_key[bk.b_prev[b]] >= k:
            b = bk.b_prev[b]
        if bk.b_key[b] == k:
            _bk_push(bk, b, x)
            return
        nb = _bk_new(bk, k)
        p = bk.b_prev[b]
        bk.b_next[nb] = b
        bk.b_prev[nb] = p
        bk.b_prev[b] = nb
        if p >= 0:
            bk.b_next[p] = nb
        else:
            bk.meta[0] = nb
    _bk_push(bk, nb, x)


cdef void _bk_update(Buckets* bk, const i64* c, i64 h, i64 s) noexcept nogil:
    cdef i64 xs[4]
    cdef i64 i, j, t, x, cur, k, last = -2
    xs[0] = h - 1
    xs[1] = h
    xs[2] = h + s - 1
    xs[3] = h + s
    # four entries: insertion sort
    for i in range(1, 4):
        t = xs[i]
        j = i - 1
        while j >= 0 and xs[j] > t:
            xs[j + 1] = xs[j]
            j -= 1
        xs[j + 1] = t
    for i in range(4):
        x = xs[i]
        if x == last or x < 0 or x >= bk.B:
            continue
        last = x
        cur = bk.lev_b[x]
        if _bk_member(bk, c, x):
            k = _bk_key(c, bk.B, x)
            if cur >= 0:
                if bk.b_key[cur] == k:
                    continue
                _bk_insert(bk, x, k, _bk_unlink(bk, x))
            else:
                _bk_insert(bk, x, k, -1)
        elif cur >= 0:
            _bk_unlink(bk, x)


cdef inline i64 _bk_choose(Buckets* bk) noexcept nogil:
    return bk.b_head[bk.meta[0]]


# -- Python entry points -------------------------------------------------------

cdef void _load_params(Params* p, object spec, i64 B,
                       const unsigned char[::1] dmask, const i64[::1] wint, const double[::1] wflt):
    p.code = spec.code
    p.B = B
    p.dmask = &dmask[0]
    p.wint = &wint[0]
    p.wflt = &wflt[0]
    p.r_int = spec.r_int
    p.r_flt = spec.r_flt
    p.margin = spec.margin


def choose(packing, spec, s):
    cdef Params p
    cdef const unsigned char[::1] dmask = spec.dmask
    cdef const i64[::1] wint = spec.wint
    cdef const double[::1] wflt = spec.wflt
    cdef i64[::1] counts = packing.counts
    _load_params(&p, spec, packing.B, dmask, wint, wflt)
    return _choose(&counts[0], s, &p)


def pack_block(packing, spec, sizes, imag, Py_ssize_t start, Py_ssize_t stop, buckets):
    """Pack sizes[start:stop]; imag[i] != 0 marks imaginary items (may be None)."""
    cdef Params p
    cdef Buckets bk
    cdef const unsigned char[::1] dmask = spec.dmask
    cdef const i64[::1] wint = spec.wint
    cdef const double[::1] wflt = spec.wflt
    cdef i64 B = packing.B
    cdef i64[::1] counts = packing.counts
    cdef i64[::1] top = packing.top
    cdef i64[::1] below = packing.below
    cdef i64[::1] st = packing.stats
    cdef const int[::1] sz = sizes
    cdef const unsigned char[::1] im
    cdef const unsigned char* imp = NULL
    cdef i64[::1] lev_b, lev_next, lev_prev, b_key, b_head, b_next, b_prev, meta
    cdef const unsigned char[::1] bdmask
    cdef bint use_bk = buckets is not None
    cdef i64* c = &counts[0]
    cdef i64 s, h, nh, b
    cdef bint is_imag
    cdef Py_ssize_t i
    if stop <= start:
        return
    _load_params(&p, spec, B, dmask, wint, wflt)
    if imag is not None:
        im = imag
        imp = &im[0]
    if use_bk:
        lev_b = buckets.lev_b
        lev_next = buckets.lev_next
        lev_prev = buckets.lev_prev
        b_key = buckets.b_key
        b_head = buckets.b_head
        b_next = buckets.b_next
        b_prev = buckets.b_prev
        meta = buckets.meta
        bdmask = buckets.dmask
        bk.B = B
        bk.lev_b = &lev_b[0]
        bk.lev_next = &lev_next[0]
        bk.lev_prev = &lev_prev[0]
        bk.b_key = &b_key[0]
        bk.b_head = &b_head[0]
        bk.b_next = &b_next[0]
        bk.b_prev = &b_prev[0]
        bk.meta = &meta[0]
        bk.dmask = &bdmask[0]
    with nogil:
        for i in range(start, stop):
            s = sz[i]
            is_imag = imp != NULL and imp[i] != 0
            if use_bk and is_imag and s == 1:
                h = _bk_choose(&bk)
            else:
                h = _choose(c, s, &p)
            if h > 0:
                st[2] += 1 - 2 * c[h]
            nh = h + s
            if nh < B:
                st[2] += 2 * c[nh] + 1
            if h == 0:
                b = st[3]
                st[3] += 1
            else:
                b = top[h]
                top[h] = below[b]
                c[h] -= 1
            if nh == B:
                st[4] += 1
                below[b] = -1
            else:
                below[b] = top[nh]
                top[nh] = b
                c[nh] += 1
            if is_imag:
                st[5] += 1
                st[6] += s
            else:
                st[0] += 1
                st[1] += s
            if use_bk:
                _bk_update(&bk, c, h, s)
