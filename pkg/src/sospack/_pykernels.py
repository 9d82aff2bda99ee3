"""Pure-Python packing kernels.

Same algorithms, argument order and tie-breaking as the compiled ``_kernels``
module; used when the extension is not built or ``SOSPACK_PURE=1``.
"""

import numpy as np

P_SS = 0
P_SSD = 1
P_SRS_INT = 2
P_SRS_FLT = 3
P_SINF = 4
P_SMINH = 5
P_SMAXH = 6
P_PERFECT = 7
P_WSS_INT = 8
P_WSS_FLT = 9
P_BF = 10

_LD = np.longdouble


def _choose_ss(c, B, s, dmask):
    best_h = -1
    best = 0
    for h in range(B - s, 0, -1):
        if c[h] == 0:
            continue
        if dmask is not None and h + s < B and dmask[h + s]:
            continue
        v = 1 - 2 * c[h]
        if h + s < B:
            v += 2 * c[h + s] + 1
        if best_h < 0 or v < best:
            best, best_h = v, h
    if dmask is not None and s < B and dmask[s]:
        return 0 if best_h < 0 else best_h
    v = 2 * c[s] + 1 if s < B else 0
    if best_h < 0 or v < best:
        return 0
    return best_h


def _ipow(x, r):
    return x**r


def _choose_srs_int(c, B, s, r):
    best_h = 0
    best = _ipow(c[s] + 1, r) - _ipow(c[s], r) if s < B else 0
    found = False
    for h in range(B - s, 0, -1):
        if c[h] == 0:
            continue
        v = _ipow(c[h] - 1, r) - _ipow(c[h], r)
        if h + s < B:
            v += _ipow(c[h + s] + 1, r) - _ipow(c[h + s], r)
        if not found or v < cur:
            cur, cur_h, found = v, h, True
    if found and cur <= best:
        return cur_h
    return best_h


def _better(v, best, margin):
    scale = max(_LD(1), abs(v), abs(best))
    return v < best - margin * scale


def _choose_srs_flt(c, B, s, r, margin):
    r = _LD(r)
    found = False
    cur = _LD(0)
    cur_h = 0
    for h in range(B - s, 0, -1):
        if c[h] == 0:
            continue
        v = _LD(c[h] - 1) ** r - _LD(c[h]) ** r
        if h + s < B:
            v += _LD(c[h + s] + 1) ** r - _LD(c[h + s]) ** r
        if not found or _better(v, cur, margin):
            cur, cur_h, found = v, h, True
    v0 = _LD(c[s] + 1) ** r - _LD(c[s]) ** r if s < B else _LD(0)
    if not found or _better(v0, cur, margin):
        return 0
    return cur_h


def _choose_wss_int(c, B, s, w):
    found = False
    cur = 0
    cur_h = 0
    for h in range(B - s, 0, -1):
        if c[h] == 0:
            continue
        v = w[h] * (1 - 2 * c[h])
        if h + s < B:
            v += w[h + s] * (2 * c[h + s] + 1)
        if not found or v < cur:
            cur, cur_h, found = v, h, True
    v0 = w[s] * (2 * c[s] + 1) if s < B else 0
    if not found or v0 < cur:
        return 0
    return cur_h


def _choose_wss_flt(c, B, s, w, margin):
    found = False
    cur = _LD(0)
    cur_h = 0
    for h in range(B - s, 0, -1):
        if c[h] == 0:
            continue
        v = _LD(w[h]) * _LD(1 - 2 * c[h])
        if h + s < B:
            v += _LD(w[h + s]) * _LD(2 * c[h + s] + 1)
        if not found or _better(v, cur, margin):
            cur, cur_h, found = v, h, True
    v0 = _LD(w[s]) * _LD(2 * c[s] + 1) if s < B else _LD(0)
    if not found or _better(v0, cur, margin):
        return 0
    return cur_h


def _cnt(c, B, x):
    return 0 if x >= B else c[x]


def _choose_sinf(c, B, s):
    best_h = -1
    best = -1
    for h in range(B - s, 0, -1):
        if c[h] > 0 and c[h] > _cnt(c, B, h + s) and c[h] > best:
            best, best_h = c[h], h
    if best_h >= 0:
        return best_h
    return _choose_sminh(c, B, s)


def _choose_sminh(c, B, s):
    best_h = -1
    best = 0
    for h in range(B - s, 0, -1):
        if c[h] == 0:
            continue
        v = _cnt(c, B, h + s)
        if best_h < 0 or v < best:
            best, best_h = v, h
    if best_h < 0 or _cnt(c, B, s) < best:
        return 0
    return best_h


def _choose_smaxh(c, B, s):
    best_h = 0
    best = 0
    for h in range(B - s, 0, -1):
        if c[h] > best:
            best, best_h = c[h], h
    return best_h


def _choose_bf(c, B, s):
    for h in range(B - s, 0, -1):
        if c[h] > 0:
            return h
    return 0


def _choose(c, B, s, spec):
    code = spec.code
    if code == P_SS:
        return _choose_ss(c, B, s, None)
    if code == P_SSD:
        return _choose_ss(c, B, s, spec.dmask_list)
    if code == P_PERFECT:
        if s < B and c[B - s] > 0:
            return B - s
        return _choose_ss(c, B, s, None)
    if code == P_SRS_INT:
        return _choose_srs_int(c, B, s, spec.r_int)
    if code == P_SRS_FLT:
        return _choose_srs_flt(c, B, s, spec.r_flt, _LD(spec.margin))
    if code == P_SINF:
        return _choose_sinf(c, B, s)
    if code == P_SMINH:
        return _choose_sminh(c, B, s)
    if code == P_SMAXH:
        return _choose_smaxh(c, B, s)
    if code == P_WSS_INT:
        return _choose_wss_int(c, B, s, spec.wint_list)
    if code == P_WSS_FLT:
        return _choose_wss_flt(c, B, s, spec.wflt_list, _LD(spec.margin))
    if code == P_BF:
        return _choose_bf(c, B, s)
    raise ValueError(f"unknown policy code {code}")


def choose(packing, spec, s):
    c = [int(x) for x in packing.counts]
    return _choose(c, packing.B, int(s), spec)


def pack_block(packing, spec, sizes, imag, start, stop, buckets):
    """Pack sizes[start:stop]; imag[i] != 0 marks imaginary items (may be None)."""
    B = packing.B
    counts = packing.counts
    c = [int(x) for x in counts]
    top = packing.top
    below = packing.below
    st = packing.stats
    items, size, ss, nbins, full = int(st[0]), int(st[1]), int(st[2]), int(st[3]), int(st[4])
    nimag, imag_size = int(st[5]), int(st[6])
    for i in range(start, stop):
        s = int(sizes[i])
        is_imag = imag is not None and imag[i] != 0
        if buckets is not None and is_imag and s == 1:
            h = buckets.choose()
        else:
            h = _choose(c, B, s, spec)
        if h > 0:
            ss += 1 - 2 * c[h]
        nh = h + s
        if nh < B:
            ss += 2 * c[nh] + 1
        if h == 0:
            b = nbins
            nbins += 1
        else:
            b = int(top[h])
            top[h] = below[b]
            c[h] -= 1
            counts[h] = c[h]
        if nh == B:
            full += 1
            below[b] = -1
        else:
            below[b] = top[nh]
            top[nh] = b
            c[nh] += 1
            counts[nh] = c[nh]
        if is_imag:
            nimag += 1
            imag_size += s
        else:
            items += 1
            size += s
        if buckets is not None:
            buckets.update(counts, h, s)
    st[0], st[1], st[2], st[3], st[4], st[5], st[6] = items, size, ss, nbins, full, nimag, imag_size
