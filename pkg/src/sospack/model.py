"""Packing state, sum-of-squares bookkeeping and dead-end levels."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

# layout of Packing.stats; the kernels index the same slots
ST_ITEMS = 0  # real items packed
ST_SIZE = 1  # total real size s(L)
ST_SS = 2  # running sum of squares
ST_BINS = 3  # bins ever opened (also the next bin id)
ST_FULL = 4  # bins that reached level B
ST_IMAG = 5  # imaginary items packed
ST_IMAG_SIZE = 6  # total imaginary size
ST_CLOSED = 7  # partially filled bins closed administratively
ST_CLOSED_GAP = 8  # total gap B - h of those bins
N_STATS = 9


class IllegalPlacement(ValueError):
    pass


class Profile:
    """Counts N(1..B-1) of open bins per level, stored densely with N(0) = N(B) = 0."""

    __slots__ = ("B", "counts")

    def __init__(self, B: int, counts=None):
        if B < 1:
            raise ValueError("bin size must be positive")
        self.B = B
        if counts is None:
            self.counts = np.zeros(B + 1, dtype=np.int64)
        else:
            arr = np.asarray(counts, dtype=np.int64)
            if arr.shape != (B + 1,):
                raise ValueError(f"expected {B + 1} slots, got shape {arr.shape}")
            if arr[0] != 0 or arr[B] != 0 or (arr < 0).any():
                raise ValueError("counts must be nonnegative with N(0) = N(B) = 0")
            self.counts = arr

    @classmethod
    def from_levels(cls, B: int, levels: Mapping[int, int]) -> "Profile":
        arr = np.zeros(B + 1, dtype=np.int64)
        for h, n in levels.items():
            if not 1 <= h <= B - 1:
                raise ValueError(f"level {h} outside [1, {B - 1}]")
            arr[h] = n
        return cls(B, arr)

    def __getitem__(self, h: int) -> int:
        return int(self.counts[h])

    def as_dict(self) -> dict[int, int]:
        return {h: int(n) for h, n in enumerate(self.counts) if n}

    def copy(self) -> "Profile":
        return Profile(self.B, self.counts.copy())

    def __eq__(self, other):
        return isinstance(other, Profile) and self.B == other.B and np.array_equal(self.counts, other.counts)

    def __repr__(self):
        return f"Profile(B={self.B}, {self.as_dict()})"


@dataclass(frozen=True)
class PlacementDelta:
    level: int
    d: int  # N(h+s) - N(h) with true counts, N(0) = N(B) = 0
    delta_ss: int


def ss_value(profile: Profile) -> int:
    c = profile.counts
    return int(np.dot(c, c))


def legal_levels(profile: Profile, s: int) -> set[int]:
    B = profile.B
    if not 1 <= s <= B:
        raise IllegalPlacement(f"item size {s} outside [1, {B}]")
    c = profile.counts
    return {0} | {h for h in range(1, B - s + 1) if c[h] > 0}


def ss_change(counts, B: int, h: int, s: int) -> int:
    """Change in ss when a size-s item goes to level h (no legality check)."""
    out = 0
    if h > 0:
        out += 1 - 2 * int(counts[h])
    if h + s < B:
        out += 2 * int(counts[h + s]) + 1
    return out


def placement_delta(profile: Profile, h: int, s: int) -> PlacementDelta:
    B = profile.B
    c = profile.counts
    if not 1 <= s <= B or h < 0 or h + s > B:
        raise IllegalPlacement(f"size {s} does not fit at level {h} (B={B})")
    if h > 0 and c[h] == 0:
        raise IllegalPlacement(f"no open bin at level {h}")
    d = int(c[h + s]) - int(c[h])
    return PlacementDelta(h, d, ss_change(c, B, h, s))


class Packing:
    """Profile plus per-level LIFO stacks of bin ids and running totals.

    The stacks are intrusive singly linked lists: ``top[h]`` is the newest bin at
    level h and ``below[b]`` the bin under b.  A bin at level B leaves the profile.
    """

    def __init__(self, B: int, capacity: int = 1024):
        self.B = B
        self.profile = Profile(B)
        self.top = np.full(B + 1, -1, dtype=np.int64)
        self.below = np.full(max(capacity, 16), -1, dtype=np.int64)
        self.stats = np.zeros(N_STATS, dtype=np.int64)
        # First Fit bypasses the level stacks and keeps its own bin order
        self.tracks_stacks = True

    @property
    def counts(self) -> np.ndarray:
        return self.profile.counts

    # -- totals -------------------------------------------------------------

    n_items = property(lambda self: int(self.stats[ST_ITEMS]))
    total_size = property(lambda self: int(self.stats[ST_SIZE]))
    ss = property(lambda self: int(self.stats[ST_SS]))
    bins = property(lambda self: int(self.stats[ST_BINS]))
    full_bins = property(lambda self: int(self.stats[ST_FULL]))
    imag_items = property(lambda self: int(self.stats[ST_IMAG]))
    imag_size = property(lambda self: int(self.stats[ST_IMAG_SIZE]))
    closed_bins = property(lambda self: int(self.stats[ST_CLOSED]))
    closed_gap = property(lambda self: int(self.stats[ST_CLOSED_GAP]))

    @property
    def open_bins(self) -> int:
        return int(self.counts.sum())

    def ensure_capacity(self, extra: int) -> None:
        need = int(self.stats[ST_BINS]) + extra
        if need > self.below.shape[0]:
            cap = max(need, 2 * self.below.shape[0])
            grown = np.full(cap, -1, dtype=np.int64)
            grown[: self.below.shape[0]] = self.below
            self.below = grown

    # -- mutation -----------------------------------------------------------

    def place(self, h: int, s: int, imaginary: bool = False) -> int:
        """Put a size-s item into the newest bin at level h (h = 0 opens a bin)."""
        B = self.B
        c = self.counts
        if not 1 <= s <= B or h < 0 or h + s > B:
            raise IllegalPlacement(f"size {s} does not fit at level {h} (B={B})")
        if h > 0 and c[h] == 0:
            raise IllegalPlacement(f"no open bin at level {h}")
        st = self.stats
        st[ST_SS] += ss_change(c, B, h, s)
        if h == 0:
            self.ensure_capacity(1)
            b = int(st[ST_BINS])
            st[ST_BINS] += 1
        else:
            b = int(self.top[h])
            self.top[h] = self.below[b]
            c[h] -= 1
        nh = h + s
        if nh == B:
            st[ST_FULL] += 1
            self.below[b] = -1
        else:
            self.below[b] = self.top[nh]
            self.top[nh] = b
            c[nh] += 1
        if imaginary:
            st[ST_IMAG] += 1
            st[ST_IMAG_SIZE] += s
        else:
            st[ST_ITEMS] += 1
            st[ST_SIZE] += s
        return b

    def close_all(self) -> int:
        """Close every partially filled bin; returns how many were closed."""
        c = self.counts
        n = int(c.sum())
        gap = int(np.dot(c, self.B - np.arange(self.B + 1)))
        self.stats[ST_CLOSED] += n
        self.stats[ST_CLOSED_GAP] += gap
        c[:] = 0
        self.top[:] = -1
        self.stats[ST_SS] = 0
        return n

    # -- inspection ---------------------------------------------------------

    def stack(self, h: int) -> list[int]:
        out = []
        b = int(self.top[h])
        while b >= 0:
            out.append(b)
            b = int(self.below[b])
        return out

    def waste(self) -> Fraction:
        """Gap waste: open-bin gaps plus closed-bin gaps, over B."""
        B = self.B
        open_gap = int(np.dot(self.counts, B - np.arange(B + 1)))
        return Fraction(open_gap + self.closed_gap, B)

    def reported_waste(self) -> Fraction:
        """bins - s(L)/B with s(L) the real size only, so imaginary volume counts as waste."""
        return Fraction(self.B * self.bins - self.total_size, self.B)

    def check(self) -> None:
        """Assert the structural invariants (tests and debugging)."""
        B = self.B
        c = self.counts
        assert c[0] == 0 and c[B] == 0 and (c >= 0).all()
        if self.tracks_stacks:
            for h in range(1, B):
                assert len(self.stack(h)) == c[h], f"stack/count mismatch at level {h}"
        assert self.ss == ss_value(self.profile)
        assert self.bins == self.open_bins + self.full_bins + self.closed_bins
        assert self.waste() + Fraction(self.imag_size, B) == self.reported_waste()

    def snapshot(self) -> dict:
        return {
            "bins": self.bins,
            "ss": self.ss,
            "n_items": self.n_items,
            "profile": self.profile.as_dict(),
        }


def place(packing: Packing, h: int, s: int) -> Packing:
    packing.place(h, s)
    return packing


def waste(packing: Packing) -> Fraction:
    return packing.waste()


def reachable_levels(B: int, U: Iterable[int]) -> np.ndarray:
    """reach[x] is True when x is a sum of members of U (with repetition), 0 <= x <= B."""
    reach = np.zeros(B + 1, dtype=bool)
    reach[0] = True
    us = sorted(set(int(u) for u in U))
    for x in range(1, B + 1):
        for u in us:
            if u > x:
                break
            if reach[x - u]:
                reach[x] = True
                break
    return reach


def dead_end_levels(B: int, U: Iterable[int]) -> set[int]:
    """Levels reachable with sizes from U whose residual B - h is not."""
    us = list(U)
    if not us:
        raise ValueError("size set must be nonempty")
    if any(not 1 <= u <= B for u in us):
        raise ValueError(f"sizes must lie in [1, {B}]")
    reach = reachable_levels(B, us)
    return {h for h in range(1, B) if reach[h] and not reach[B - h]}


def dead_end_mask(B: int, D: Iterable[int]) -> np.ndarray:
    mask = np.zeros(B + 1, dtype=np.uint8)
    for h in D:
        mask[h] = 1
    return mask
