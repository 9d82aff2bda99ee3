"""ApproxSS: SS decisions from periodically refreshed per-size local counts.

Each seen size s keeps its own copy N_s of the profile.  A level h carries a
counter c(h) in 1..tJ that advances whenever N(h) changes; when c(h) = i*t the
copy for the i-th seen size is refreshed at h.  So every copy is at most tJ
changes behind, and a level whose local count exceeds tJ certainly holds a bin.
Per size a heap of (rank, -h, version) entries gives the move; stale entries are
skipped lazily.
"""

from __future__ import annotations

import heapq

import numpy as np

from .model import IllegalPlacement
from .packers import OnlinePacker, PolicyError


class TooManySizes(PolicyError):
    pass


class ApproxSSPacker(OnlinePacker):
    def __init__(self, B: int, t: int, J: int = 5, adaptive: bool = False):
        super().__init__(B)
        if t < 1 or J < 1:
            raise PolicyError("approx_ss needs t >= 1 and J >= 1")
        self.t = t
        self.J = J
        self.adaptive = adaptive
        self.policy_id = f"approx_ss:{t}" if adaptive else f"approx_ss:{t}:{J}"
        self.sizes: list[int] = []  # seen sizes, in order of first arrival
        self.restarts: list[tuple[int, int]] = []  # (items packed so far, new J)
        self._reset_local()

    @property
    def delta(self) -> int:
        return self.t * self.J

    def _reset_local(self) -> None:
        B = self.B
        self.ctr = [1] * (B + 1)
        self.local: list[list[int]] = []
        self.heaps: list[list[tuple[int, int, int]]] = []
        self.ver: list[list[int]] = []
        for s in self.sizes:
            self._add_size(s, register=False)

    def _add_size(self, s: int, register: bool = True) -> int:
        if register:
            self.sizes.append(s)
        i = len(self.local)
        self.local.append([int(x) for x in self.packing.counts])
        self.ver.append([0] * (self.B + 1))
        self.heaps.append([])
        for h in range(0, self.B - s + 1):
            self._repair(i, h)
        heapq.heapify(self.heaps[i])
        return i

    def _rank(self, i: int, h: int) -> int:
        B, s, Ns = self.B, self.sizes[i], self.local[i]
        up = -1 if h + s == B else 2 * Ns[h + s]
        down = 1 if h == 0 else 2 * Ns[h]
        return up - down + 2

    def _repair(self, i: int, h: int) -> None:
        """Drop any entry for level h in queue i and reinsert if h qualifies."""
        s = self.sizes[i]
        if h < 0 or h + s > self.B:
            return
        self.ver[i][h] += 1
        if h == 0 or self.local[i][h] > self.delta:
            heapq.heappush(self.heaps[i], (self._rank(i, h), -h, self.ver[i][h]))

    def _index(self, s: int) -> int:
        try:
            return self.sizes.index(s)
        except ValueError:
            return -1

    def _choose_i(self, i: int) -> int:
        heap, ver = self.heaps[i], self.ver[i]
        while True:
            rank, negh, v = heap[0]
            if ver[-negh] == v:
                return -negh
            heapq.heappop(heap)

    def choose(self, s: int) -> int:
        i = self._index(s)
        if i < 0:
            # a fresh copy equals the true profile, so this is plain SS over
            # the qualifying levels
            best_h, best = 0, None
            c = self.packing.counts
            for h in range(self.B - s, -1, -1):
                if h == 0 or c[h] > self.delta:
                    up = -1 if h + s == self.B else 2 * int(c[h + s])
                    down = 1 if h == 0 else 2 * int(c[h])
                    r = up - down
                    if best is None or r < best:
                        best_h, best = h, r
            return best_h
        return self._choose_i(i)

    def _on_change(self, x: int) -> None:
        c = self.ctr[x] + 1
        if c == self.delta + 1:
            c = 1
        self.ctr[x] = c
        if c % self.t == 0:
            i = c // self.t - 1
            if i < len(self.local):
                self.local[i][x] = int(self.packing.counts[x])
                self._repair(i, x)
                self._repair(i, x - self.sizes[i])

    def pack(self, s: int) -> int:
        s = self._check_size(s)
        i = self._index(s)
        if i < 0:
            if len(self.sizes) >= self.J:
                if not self.adaptive:
                    raise TooManySizes(f"more than J={self.J} distinct sizes")
                self.packing.close_all()
                self.J += 1
                self.sizes.append(s)
                self.restarts.append((self.packing.n_items, self.J))
                self._reset_local()
                i = len(self.sizes) - 1
            else:
                i = self._add_size(s)
        h = self._choose_i(i)
        if h > 0 and self.packing.counts[h] == 0:
            raise IllegalPlacement(f"local counts pointed at empty level {h}")
        self.packing.place(h, s)
        if h > 0:
            self._on_change(h)
        if h + s < self.B:
            self._on_change(h + s)
        return h

    def staleness(self) -> int:
        """max over seen sizes and levels of |N(h) - N_s(h)|."""
        if not self.local:
            return 0
        c = self.packing.counts
        return int(np.abs(np.asarray(self.local, dtype=np.int64) - c).max())


def make_approx(policy: str, B: int, arg: str) -> ApproxSSPacker:
    parts = arg.split(":") if arg else []
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise PolicyError(f"bad approx_ss parameters in {policy!r}") from None
    if len(nums) == 1:
        return ApproxSSPacker(B, nums[0], adaptive=True)
    if len(nums) == 2:
        return ApproxSSPacker(B, nums[0], nums[1])
    raise PolicyError(f"use approx_ss:<t> or approx_ss:<t>:<J>, got {policy!r}")
