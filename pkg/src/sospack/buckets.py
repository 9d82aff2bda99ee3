"""Constant-time choice of the best level for a size-1 item.

Levels are grouped into buckets by key ``2*delta_h = C(h+1) - C(h)`` where
``C(x) = 2 N(x)`` for interior levels, ``C(0) = 1`` and ``C(B) = -1``.  Placing a
size-1 item at level h changes ss by ``key + 2``, so the head of the first
bucket is a minimizer.  Buckets form a sorted doubly linked list and each bucket
holds a doubly linked list of levels.

All state lives in int64 arrays so the compiled kernel can update the same
structure in place; the methods below are the reference implementation.
"""

from __future__ import annotations

import numpy as np

M_FIRST = 0
M_FREE = 1


class DeltaBucketList:
    def __init__(self, B: int, dmask=None):
        self.B = B
        self.lev_b = np.full(B, -1, dtype=np.int64)
        self.lev_next = np.full(B, -1, dtype=np.int64)
        self.lev_prev = np.full(B, -1, dtype=np.int64)
        nb = B + 1
        self.b_key = np.zeros(nb, dtype=np.int64)
        self.b_head = np.full(nb, -1, dtype=np.int64)
        self.b_next = np.full(nb, -1, dtype=np.int64)
        self.b_prev = np.full(nb, -1, dtype=np.int64)
        self.meta = np.zeros(2, dtype=np.int64)
        # forbidden target levels: h is skipped when h + 1 is marked
        self.dmask = np.zeros(B + 1, dtype=np.uint8) if dmask is None else np.asarray(dmask, dtype=np.uint8).copy()
        self.reset()

    # -- storage management ---------------------------------------------------

    def reset(self) -> None:
        self.lev_b[:] = -1
        self.lev_next[:] = -1
        self.lev_prev[:] = -1
        self.b_head[:] = -1
        self.b_prev[:] = -1
        nb = self.b_next.shape[0]
        self.b_next[:] = np.arange(1, nb + 1)
        self.b_next[-1] = -1
        self.meta[M_FIRST] = -1
        self.meta[M_FREE] = 0

    def rebuild(self, counts, dmask=None) -> None:
        if dmask is not None:
            self.dmask = np.asarray(dmask, dtype=np.uint8).copy()
        self.reset()
        for x in range(self.B):
            if self.is_member(counts, x):
                self._insert(x, self.key(counts, x), -1)

    def _new_bucket(self, k: int) -> int:
        b = int(self.meta[M_FREE])
        self.meta[M_FREE] = self.b_next[b]
        self.b_key[b] = k
        self.b_head[b] = -1
        self.b_next[b] = -1
        self.b_prev[b] = -1
        return b

    def _free_bucket(self, b: int) -> None:
        self.b_next[b] = self.meta[M_FREE]
        self.meta[M_FREE] = b

    # -- keys ------------------------------------------------------------------

    def key(self, counts, h: int) -> int:
        B = self.B
        up = -1 if h + 1 == B else 2 * int(counts[h + 1])
        down = 1 if h == 0 else 2 * int(counts[h])
        return up - down

    def is_member(self, counts, h: int) -> bool:
        if self.dmask[h + 1]:
            return False
        return h == 0 or counts[h] > 0

    # -- list surgery ------------------------------------------------------------

    def _unlink(self, x: int) -> int:
        """Remove level x; return a nearby bucket to start the next search from."""
        b = int(self.lev_b[x])
        p, n = int(self.lev_prev[x]), int(self.lev_next[x])
        if p >= 0:
            self.lev_next[p] = n
        else:
            self.b_head[b] = n
        if n >= 0:
            self.lev_prev[n] = p
        self.lev_b[x] = -1
        self.lev_next[x] = -1
        self.lev_prev[x] = -1
        if self.b_head[b] >= 0:
            return b
        bp, bn = int(self.b_prev[b]), int(self.b_next[b])
        if bp >= 0:
            self.b_next[bp] = bn
        else:
            self.meta[M_FIRST] = bn
        if bn >= 0:
            self.b_prev[bn] = bp
        self._free_bucket(b)
        return bp if bp >= 0 else bn

    def _push(self, b: int, x: int) -> None:
        head = int(self.b_head[b])
        self.lev_next[x] = head
        self.lev_prev[x] = -1
        if head >= 0:
            self.lev_prev[head] = x
        self.b_head[b] = x
        self.lev_b[x] = b

    def _insert(self, x: int, k: int, hint: int) -> None:
        b = int(self.meta[M_FIRST]) if hint < 0 else hint
        if b < 0:
            nb = self._new_bucket(k)
            self.meta[M_FIRST] = nb
            self._push(nb, x)
            return
        bk = self.b_key
        if bk[b] <= k:
            while self.b_next[b] >= 0 and bk[self.b_next[b]] <= k:
                b = int(self.b_next[b])
            if bk[b] == k:
                self._push(b, x)
                return
            nb = self._new_bucket(k)
            n = int(self.b_next[b])
            self.b_prev[nb] = b
            self.b_next[nb] = n
            self.b_next[b] = nb
            if n >= 0:
                self.b_prev[n] = nb
        else:
            while self.b_prev[b] >= 0 and bk[self.b_prev[b]] >= k:
                b = int(self.b_prev[b])
            if bk[b] == k:
                self._push(b, x)
                return
            nb = self._new_bucket(k)
            p = int(self.b_prev[b])
            self.b_next[nb] = b
            self.b_prev[nb] = p
            self.b_prev[b] = nb
            if p >= 0:
                self.b_next[p] = nb
            else:
                self.meta[M_FIRST] = nb
        self._push(nb, x)

    # -- public interface --------------------------------------------------------

    def update(self, counts, h: int, s: int) -> None:
        """Repair after an item of size s went to level h (counts already updated)."""
        B = self.B
        last = -2
        for x in sorted((h - 1, h, h + s - 1, h + s)):
            if x == last or x < 0 or x >= B:
                continue
            last = x
            cur = int(self.lev_b[x])
            if self.is_member(counts, x):
                k = self.key(counts, x)
                if cur >= 0:
                    if self.b_key[cur] == k:
                        continue
                    self._insert(x, k, self._unlink(x))
                else:
                    self._insert(x, k, -1)
            elif cur >= 0:
                self._unlink(x)

    def choose(self) -> int:
        first = int(self.meta[M_FIRST])
        return int(self.b_head[first])

    def buckets(self) -> list[tuple[int, list[int]]]:
        """(key, levels in list order) for every bucket in order."""
        out = []
        b = int(self.meta[M_FIRST])
        while b >= 0:
            levels = []
            x = int(self.b_head[b])
            while x >= 0:
                levels.append(x)
                x = int(self.lev_next[x])
            out.append((int(self.b_key[b]), levels))
            b = int(self.b_next[b])
        return out

    def partition(self) -> list[tuple[int, frozenset]]:
        return [(k, frozenset(v)) for k, v in self.buckets()]

    def matches(self, counts) -> bool:
        """True when the contents equal a from-scratch rebuild on ``counts``."""
        fresh = DeltaBucketList(self.B, self.dmask)
        fresh.rebuild(counts)
        if fresh.partition() != self.partition():
            return False
        keys = [k for k, _ in self.buckets()]
        return all(a < b for a, b in zip(keys, keys[1:]))
