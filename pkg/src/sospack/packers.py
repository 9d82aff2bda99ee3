"""Deterministic online packing policies.

The ``*_choose`` functions work on a :class:`Profile` with exact arithmetic and
serve as readable references.  The packer classes run the same rules through
:mod:`sospack.kernels`.  Ties always go to the highest level, so opening a new
bin (level 0) wins only when strictly better.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .kernels import KernelSpec
from .model import (
    ST_BINS,
    ST_FULL,
    ST_ITEMS,
    ST_SIZE,
    ST_SS,
    IllegalPlacement,
    Packing,
    Profile,
    dead_end_levels,
    dead_end_mask,
    legal_levels,
    ss_change,
)


class PolicyError(ValueError):
    pass


# -- reference choose rules ----------------------------------------------------


def _argmin_highest(cands: Iterable[int], cost: Callable[[int], object]) -> int:
    best_h, best = None, None
    for h in sorted(cands, reverse=True):
        v = cost(h)
        if best_h is None or v < best:
            best_h, best = h, v
    return best_h


def _cnt(profile: Profile, x: int) -> int:
    """True count with N(0) = N(B) = 0."""
    return 0 if x <= 0 or x >= profile.B else profile[x]


def ss_choose(profile: Profile, s: int) -> int:
    c, B = profile.counts, profile.B
    return _argmin_highest(legal_levels(profile, s), lambda h: ss_change(c, B, h, s))


def ssd_choose(profile: Profile, s: int, D: Iterable[int]) -> int:
    D = set(D)
    B = profile.B
    c = profile.counts
    cands = [h for h in legal_levels(profile, s) if h + s not in D]
    if not cands:
        return 0
    return _argmin_highest(cands, lambda h: ss_change(c, B, h, s))


def _power_change(profile: Profile, h: int, s: int, f: Callable[[int], object]):
    B = profile.B
    out = 0
    if h > 0:
        n = profile[h]
        out += f(n - 1) - f(n)
    if h + s < B:
        n = profile[h + s]
        out += f(n + 1) - f(n)
    return out


def srs_choose(profile: Profile, s: int, r) -> int:
    """Minimize the change in sum N(h)^r; exact for integer r."""
    r = _parse_exponent(r)
    if isinstance(r, int):
        return _argmin_highest(legal_levels(profile, s), lambda h: _power_change(profile, h, s, lambda n: n**r))
    # non-integer exponents: compare with a relative margin, near-equal counts as a tie
    best_h, best = None, None
    for h in sorted(legal_levels(profile, s), reverse=True):
        v = _power_change(profile, h, s, lambda n: float(n) ** r)
        if best_h is None or v < best - kernels.MARGIN * max(1.0, abs(v), abs(best)):
            best_h, best = h, v
    return best_h


def sinfty_choose(profile: Profile, s: int) -> int:
    legal = legal_levels(profile, s)
    A = [h for h in legal if h >= 1 and profile[h] > _cnt(profile, h + s)]
    if A:
        return _argmin_highest(A, lambda h: -profile[h])
    return sminh_choose(profile, s)


def sminh_choose(profile: Profile, s: int) -> int:
    return _argmin_highest(legal_levels(profile, s), lambda h: _cnt(profile, h + s))


def smaxh_choose(profile: Profile, s: int) -> int:
    return _argmin_highest(legal_levels(profile, s), lambda h: -_cnt(profile, h))


def perfect_ss_choose(profile: Profile, s: int) -> int:
    B = profile.B
    if s < B and profile[B - s] > 0:
        return B - s
    return ss_choose(profile, s)


WEIGHTS: dict[str, Callable[[int, int], Fraction]] = {
    "B-h": lambda h, B: Fraction(B - h),
    "(B-h)^2": lambda h, B: Fraction((B - h) ** 2),
    "1/h": lambda h, B: Fraction(1, h),
    "1": lambda h, B: Fraction(1),
}


def level_weights(w, B: int) -> list[Fraction]:
    """Weights w(0..B) with w(0) = w(B) = 0 (unused slots); w(h) > 0 on 1..B-1."""
    if isinstance(w, str):
        if w not in WEIGHTS:
            raise PolicyError(f"unknown weight id {w!r}; choose from {sorted(WEIGHTS)}")
        f = WEIGHTS[w]
        vals = [Fraction(0)] + [f(h, B) for h in range(1, B)] + [Fraction(0)]
    elif callable(w):
        vals = [Fraction(0)] + [Fraction(w(h)) for h in range(1, B)] + [Fraction(0)]
    else:
        vals = [Fraction(x) for x in w]
        if len(vals) != B + 1:
            raise PolicyError(f"weight vector needs {B + 1} entries")
        vals[0] = vals[B] = Fraction(0)
    if any(v <= 0 for v in vals[1:B]):
        raise PolicyError("level weights must be positive")
    return vals


def weighted_ss_choose(profile: Profile, s: int, w) -> int:
    B = profile.B
    ws = level_weights(w, B)
    c = profile.counts

    def change(h):
        out = Fraction(0)
        if h > 0:
            out += ws[h] * (1 - 2 * int(c[h]))
        if h + s < B:
            out += ws[h + s] * (2 * int(c[h + s]) + 1)
        return out

    return _argmin_highest(legal_levels(profile, s), change)


def best_fit_choose(profile: Profile, s: int) -> int:
    return max(legal_levels(profile, s))


def first_fit_choose(levels: Sequence[int], s: int, B: int) -> int:
    """Bins listed in creation order by level; returns the 1-based index of the
    first bin that fits, or 0 for a new bin."""
    for i, h in enumerate(levels, start=1):
        if 0 < h and h + s <= B:
            return i
    return 0


# -- packers -------------------------------------------------------------------


class OnlinePacker:
    """Owns one :class:`Packing` and permanently places each item as it arrives."""

    policy_id = "?"

    def __init__(self, B: int):
        self.B = B
        self.packing = Packing(B)

    def choose(self, s: int) -> int:
        """Level the next real item of size s would go to (no state change)."""
        raise NotImplementedError

    def pack(self, s: int) -> int:
        """Place one real item; returns the level it went to."""
        s = self._check_size(s)
        h = self.choose(s)
        self.packing.place(h, s)
        return h

    def feed(self, sizes) -> None:
        for s in np.asarray(sizes).tolist():
            self.pack(s)

    def _check_size(self, s) -> int:
        s = int(s)
        if not 1 <= s <= self.B:
            raise IllegalPlacement(f"item size {s} outside [1, {self.B}]")
        return s

    @property
    def profile(self) -> Profile:
        return self.packing.profile

    @property
    def bins(self) -> int:
        return self.packing.bins

    @property
    def n_items(self) -> int:
        return self.packing.n_items

    def waste(self) -> Fraction:
        return self.packing.reported_waste()

    def check(self) -> None:
        self.packing.check()

    def __repr__(self):
        return f"{type(self).__name__}({self.policy_id!r}, B={self.B})"


class KernelPacker(OnlinePacker):
    """Any rule that depends only on the profile, run by the kernel backend."""

    def __init__(self, policy_id: str, spec: KernelSpec, backend=None):
        super().__init__(spec.B)
        self.policy_id = policy_id
        self.spec = spec
        self.backend = backend

    def choose(self, s: int) -> int:
        return kernels.choose(self.packing, self.spec, s, backend=self.backend)

    def feed(self, sizes) -> None:
        sizes = np.ascontiguousarray(sizes, dtype=np.int32)
        if sizes.size and (sizes.min() < 1 or sizes.max() > self.B):
            raise IllegalPlacement(f"item sizes must lie in [1, {self.B}]")
        kernels.pack_block(self.packing, self.spec, sizes, backend=self.backend)


class SSPrimePacker(KernelPacker):
    """SS restricted by the dead-end levels of the sizes seen so far."""

    def __init__(self, B: int, backend=None):
        super().__init__("ss_prime", KernelSpec(kernels.P_SSD, B), backend)
        self.seen: set[int] = set()
        self.D: set[int] = set()

    def _learn(self, s: int) -> None:
        self.seen.add(s)
        self.D = dead_end_levels(self.B, self.seen)
        self.spec.set_dmask(dead_end_mask(self.B, self.D))

    def choose(self, s: int) -> int:
        if s not in self.seen:
            D = dead_end_levels(self.B, self.seen | {s})
            return ssd_choose(self.profile, s, D)
        return super().choose(s)

    def pack(self, s: int) -> int:
        s = self._check_size(s)
        if s not in self.seen:
            self._learn(s)
        h = kernels.choose(self.packing, self.spec, s, backend=self.backend)
        self.packing.place(h, s)
        return h

    def feed(self, sizes) -> None:
        sizes = np.ascontiguousarray(sizes, dtype=np.int32)
        if sizes.size and (sizes.min() < 1 or sizes.max() > self.B):
            raise IllegalPlacement(f"item sizes must lie in [1, {self.B}]")
        start = 0
        n = sizes.shape[0]
        while start < n:
            # run until the next never-seen size
            new = [u for u in np.unique(sizes[start:]).tolist() if u not in self.seen]
            if not new:
                kernels.pack_block(self.packing, self.spec, sizes, None, start, n, backend=self.backend)
                return
            stop = min(start + int(np.argmax(sizes[start:] == u)) for u in new)
            kernels.pack_block(self.packing, self.spec, sizes, None, start, stop, backend=self.backend)
            self.pack(int(sizes[stop]))
            start = stop + 1


class FirstFitPacker(OnlinePacker):
    """Lowest-indexed open bin with room; a max segment tree over residuals."""

    policy_id = "ff"

    def __init__(self, B: int):
        super().__init__(B)
        self.packing.tracks_stacks = False
        self._cap = 1024
        self._tree = np.zeros(2 * self._cap, dtype=np.int64)
        self.levels: list[int] = []

    def _grow(self):
        old = self._tree[self._cap : self._cap + len(self.levels)].copy()
        self._cap *= 2
        self._tree = np.zeros(2 * self._cap, dtype=np.int64)
        self._tree[self._cap : self._cap + old.shape[0]] = old
        for i in range(self._cap - 1, 0, -1):
            self._tree[i] = max(self._tree[2 * i], self._tree[2 * i + 1])

    def _set(self, i: int, residual: int) -> None:
        t = self._tree
        j = i + self._cap
        t[j] = residual
        j //= 2
        while j:
            t[j] = max(t[2 * j], t[2 * j + 1])
            j //= 2

    def _find(self, s: int) -> int:
        t = self._tree
        if t[1] < s:
            return -1
        j = 1
        while j < self._cap:
            j = 2 * j if t[2 * j] >= s else 2 * j + 1
        return j - self._cap

    def choose_bin(self, s: int) -> int:
        """0-based index of the chosen bin, or -1 for a new bin."""
        return self._find(s)

    def choose(self, s: int) -> int:
        i = self._find(s)
        return 0 if i < 0 else self.levels[i]

    def pack(self, s: int) -> int:
        s = self._check_size(s)
        B = self.B
        i = self._find(s)
        if i < 0:
            h = 0
            i = len(self.levels)
            self.levels.append(0)
            if i >= self._cap:
                self._grow()
        else:
            h = self.levels[i]
        p = self.packing
        c = p.counts
        st = p.stats
        st[ST_SS] += ss_change(c, B, h, s)
        if h == 0:
            st[ST_BINS] += 1
        else:
            c[h] -= 1
        if h + s == B:
            st[ST_FULL] += 1
        else:
            c[h + s] += 1
        st[ST_ITEMS] += 1
        st[ST_SIZE] += s
        self.levels[i] = h + s
        self._set(i, B - h - s)
        return h


# -- registry ------------------------------------------------------------------


def _parse_exponent(r) -> int | float:
    if isinstance(r, str):
        try:
            fr = Fraction(r)
        except ValueError:
            raise PolicyError(f"bad exponent {r!r}") from None
        r = int(fr) if fr.denominator == 1 else float(fr)
    elif isinstance(r, float) and r.is_integer():
        r = int(r)
    if not (r > 1 and math.isfinite(r)):
        raise PolicyError(f"SrS needs a finite exponent r > 1, got {r}")
    return r


def wss_spec(B: int, w) -> KernelSpec:
    vals = level_weights(w, B)
    if all(v.denominator == 1 for v in vals):
        return KernelSpec(kernels.P_WSS_INT, B, wint=[int(v) for v in vals])
    return KernelSpec(kernels.P_WSS_FLT, B, wflt=[float(v) for v in vals])


def srs_spec(B: int, r) -> KernelSpec:
    r = _parse_exponent(r)
    if isinstance(r, int):
        return KernelSpec(kernels.P_SRS_INT, B, r_int=r)
    return KernelSpec(kernels.P_SRS_FLT, B, r_flt=r)


SIMPLE = {
    "ss": kernels.P_SS,
    "sinf": kernels.P_SINF,
    "sminh": kernels.P_SMINH,
    "smaxh": kernels.P_SMAXH,
    "perfect_ss": kernels.P_PERFECT,
    "bf": kernels.P_BF,
}

POLICY_IDS = (
    "ss ss_d ss_prime srs:<r> sinf sminh smaxh perfect_ss wss:<w> "
    "approx_ss:<t>[:<J>] bf ff ssf ss2star ssstar"
).split()


def make_packer(policy: str, B: int, dist=None, D=None, rng=None, backend=None, **kw) -> OnlinePacker:
    """Build a packer from its string id.

    ``dist`` is needed by ss_d (for its dead-end set, unless ``D`` is given),
    ssf and ss2star.  ``rng`` supplies randomness to the tuned packers: a
    ``numpy.random.SeedSequence``, an int seed, or None for seed 0.
    """
    name, _, arg = policy.partition(":")
    if dist is not None and dist.bin_size != B:
        raise PolicyError(f"distribution bin size {dist.bin_size} differs from B={B}")
    if name in SIMPLE and not arg:
        return KernelPacker(policy, KernelSpec(SIMPLE[name], B), backend)
    if name == "ss_d" and not arg:
        if D is None:
            if dist is None:
                raise PolicyError("ss_d needs a distribution or an explicit dead-end set")
            D = dead_end_levels(B, dist.support)
        return KernelPacker(policy, KernelSpec(kernels.P_SSD, B, dmask=dead_end_mask(B, D)), backend)
    if name == "ss_prime" and not arg:
        return SSPrimePacker(B, backend)
    if name == "srs":
        if not arg:
            raise PolicyError("srs needs an exponent, e.g. srs:3")
        return KernelPacker(policy, srs_spec(B, arg), backend)
    if name == "wss":
        if not arg:
            raise PolicyError(f"wss needs a weight id: {sorted(WEIGHTS)}")
        return KernelPacker(policy, wss_spec(B, arg), backend)
    if name == "ff" and not arg:
        return FirstFitPacker(B)
    if name == "approx_ss":
        from .approx import make_approx

        return make_approx(policy, B, arg)
    if name in ("ssf", "ss2star", "ssstar") and not arg:
        from . import tuned

        return tuned.make_tuned(name, B, dist=dist, rng=rng, backend=backend, **kw)
    raise PolicyError(f"unknown policy {policy!r}; known ids: {' '.join(POLICY_IDS)}")
