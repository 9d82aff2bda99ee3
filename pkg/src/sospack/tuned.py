"""Distribution-aware randomized packers.

SS_F   mixes in imaginary size-1 items at rate c/(1+c) and places them with the
       bucket structure in constant time.
SS**   mixes in imaginary items at rate T/(1+T) with size B - h drawn with
       probability Delta_h / T, packing everything by SS.
SS*    learns F from the stream: phases of 10B (0-phase) and 30B*4^(i-1)
       (i-phase) items, recomputing c of the empirical distribution at each
       phase start and closing all bins when the size set or the rate changes.

Waste counts imaginary volume: it is bins - s(L)/B over the real items only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .buckets import DeltaBucketList
from .distribution import DiscreteDistribution
from .kernels import KernelSpec
from .model import IllegalPlacement, dead_end_levels, dead_end_mask
from .packers import OnlinePacker, PolicyError, ss_choose, ssd_choose
from .rng import CoinStream, SizeStream, as_streams
from .wastelp import build_waste_lp, gap_distribution, gap_rates, solve_lp, waste_constant


class EmptyHistory(ValueError):
    pass


def empirical_distribution(counts: dict[int, int], B: int, N: int | None = None) -> DiscreteDistribution:
    """Sizes seen with probabilities X_s / N (sizes listed with count 0 get 0)."""
    total = sum(counts.values())
    if N is None:
        N = total
    if N <= 0 or total == 0:
        raise EmptyHistory("no items seen yet")
    if N != total:
        raise ValueError(f"counts sum to {total}, not N = {N}")
    sizes = sorted(counts)
    return DiscreteDistribution(B, tuple(sizes), tuple(Fraction(counts[s], N) for s in sizes))


def _rate(x: Fraction) -> Fraction:
    """x / (1 + x)."""
    return x / (1 + x)


class _MixedPacker(OnlinePacker):
    """Shared machinery: interleave imaginary items before each real item."""

    def __init__(self, B: int, rng, backend):
        super().__init__(B)
        self.streams = as_streams(rng)
        self.coins = CoinStream(self.streams.coins)
        self.backend = backend
        self.spec = KernelSpec(kernels.P_SS, B)
        self.buckets: DeltaBucketList | None = None

    def _imag_sizes(self, k: int) -> np.ndarray:
        return np.ones(k, dtype=np.int32)

    def _run(self, sizes: np.ndarray, p: Fraction) -> None:
        """Pack real ``sizes``, each preceded by a run of imaginary items (heads)."""
        n = sizes.shape[0]
        if n == 0:
            return
        heads = self.coins.until_tails(n, p)
        k = int(heads.sum())
        if k == 0:
            seq, imag = sizes, None
        else:
            seq = np.empty(heads.shape[0], dtype=np.int32)
            seq[~heads] = sizes
            seq[heads] = self._imag_sizes(k)
            imag = heads.astype(np.uint8)
        kernels.pack_block(self.packing, self.spec, seq, imag, buckets=self.buckets, backend=self.backend)

    def _validate(self, sizes) -> np.ndarray:
        sizes = np.ascontiguousarray(sizes, dtype=np.int32)
        if sizes.size and (sizes.min() < 1 or sizes.max() > self.B):
            raise IllegalPlacement(f"item sizes must lie in [1, {self.B}]")
        return sizes

    def pack(self, s: int):
        """Pack one real item (after any imaginary items the coins call for).

        Returns None: the level depends on the imaginary items drawn first.
        """
        s = self._check_size(s)
        self.feed(np.array([s], dtype=np.int32))


class SSFPacker(_MixedPacker):
    policy_id = "ssf"

    def __init__(self, B: int, dist: DiscreteDistribution | None = None, c: Fraction | None = None, rng=None, backend=None):
        super().__init__(B, rng, backend)
        if c is None:
            if dist is None:
                raise PolicyError("ssf needs a distribution (or its waste constant c)")
            c = waste_constant(dist)
        self.c = Fraction(c)
        self.rate = _rate(self.c)
        self.buckets = DeltaBucketList(B)
        self.buckets.rebuild(self.packing.counts)

    def choose(self, s: int) -> int:
        return ss_choose(self.profile, s)

    def feed(self, sizes) -> None:
        self._run(self._validate(sizes), self.rate)


class SS2StarPacker(_MixedPacker):
    policy_id = "ss2star"

    def __init__(self, B: int, dist: DiscreteDistribution | None = None, gaps=None, rng=None, backend=None):
        super().__init__(B, rng, backend)
        if gaps is None:
            if dist is None:
                raise PolicyError("ss2star needs a distribution (or its gap rates)")
            gaps = gap_rates(solve_lp(build_waste_lp(dist)))
        self.gaps = gaps
        self.rate = _rate(gaps.T)
        self.gap_dist = gap_distribution(gaps) if gaps.T > 0 else None
        self.imag_stream = SizeStream(self.gap_dist.sampler(), self.streams.imaginary) if self.gap_dist else None

    def _imag_sizes(self, k: int) -> np.ndarray:
        return self.imag_stream.take(k)

    def choose(self, s: int) -> int:
        return ss_choose(self.profile, s)

    def feed(self, sizes) -> None:
        self._run(self._validate(sizes), self.rate)


@dataclass(frozen=True)
class PhaseEvent:
    items: int  # real items seen, including the one that opened the phase
    kind: int  # 0 for a 0-phase, i for an i-phase
    budget: int
    sizes: tuple
    rate: Fraction
    closed: int  # bins closed at this phase start


def phase_budget(kind: int, B: int) -> int:
    return 10 * B if kind == 0 else 30 * B * 4 ** (kind - 1)


class SSStarPacker(_MixedPacker):
    policy_id = "ssstar"

    def __init__(self, B: int, rng=None, backend=None, warm_start: bool = True):
        super().__init__(B, rng, backend)
        self.spec = KernelSpec(kernels.P_SSD, B)
        self.counts_seen: dict[int, int] = {}
        self.seen = 0
        self.D: set[int] = set()
        self.kind = -1
        self.left = 0
        self.rate = Fraction(0)
        self.events: list[PhaseEvent] = []
        self.warm_start = warm_start
        self.buckets = DeltaBucketList(B)
        self.buckets.rebuild(self.packing.counts)

    @property
    def U(self) -> tuple:
        return tuple(sorted(self.counts_seen))

    def choose(self, s: int) -> int:
        if s not in self.counts_seen:
            return ssd_choose(self.profile, s, dead_end_levels(self.B, set(self.counts_seen) | {s}))
        return ssd_choose(self.profile, s, self.D)

    def _start_phase(self, kind: int) -> None:
        B = self.B
        U_old = self.events[-1].sizes if self.events else ()
        U = self.U
        Fp = empirical_distribution(self.counts_seen, B, self.seen)
        rate = _rate(waste_constant(Fp, self.warm_start))
        closed = 0
        if U != U_old or rate != self.rate:
            closed = self.packing.close_all()
        if U != U_old:
            self.D = dead_end_levels(B, U)
            mask = dead_end_mask(B, self.D)
            self.spec.set_dmask(mask)
            self.buckets.rebuild(self.packing.counts, mask)
        elif closed:
            self.buckets.rebuild(self.packing.counts)
        self.rate = rate
        self.kind = kind
        self.left = phase_budget(kind, B)
        self.events.append(PhaseEvent(self.seen, kind, self.left, U, rate, closed))

    def _note(self, chunk: np.ndarray) -> None:
        vals, cnt = np.unique(chunk, return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            self.counts_seen[v] = self.counts_seen.get(v, 0) + c
        self.seen += chunk.shape[0]

    def feed(self, sizes) -> None:
        sizes = self._validate(sizes)
        n = sizes.shape[0]
        i = 0
        while i < n:
            s = int(sizes[i])
            if s not in self.counts_seen:
                self._note(sizes[i : i + 1])
                self._start_phase(0)
            elif self.left == 0:
                self._note(sizes[i : i + 1])
                self._start_phase(self.kind + 1)
            else:
                self._note(sizes[i : i + 1])
            # the item at i belongs to the current phase; extend while no event is due
            stop = min(n, i + self.left)
            if stop > i + 1:
                window = sizes[i + 1 : stop]
                known = np.isin(window, np.fromiter(self.counts_seen, dtype=np.int32))
                if not known.all():
                    stop = i + 1 + int(np.argmin(known))
                self._note(sizes[i + 1 : stop])
            self.left -= stop - i
            self._run(sizes[i:stop], self.rate)
            i = stop


def make_tuned(name: str, B: int, dist=None, rng=None, backend=None, **kw) -> OnlinePacker:
    if name == "ssf":
        return SSFPacker(B, dist=dist, rng=rng, backend=backend, **kw)
    if name == "ss2star":
        return SS2StarPacker(B, dist=dist, rng=rng, backend=backend, **kw)
    if name == "ssstar":
        return SSStarPacker(B, rng=rng, backend=backend, **kw)
    raise PolicyError(f"unknown tuned policy {name!r}")
