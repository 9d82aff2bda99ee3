"""Seeded random streams.

Every stream is a Philox generator keyed by ``SeedSequence([seed, trial, stream])``,
so trials are independent of each other and of scheduling.  Consumers draw in
fixed-size blocks, so results do not depend on how a run is split into chunks.
"""

from __future__ import annotations

import numpy as np

ITEMS = 0
COINS = 1
IMAGINARY = 2
ADVERSARY = 3

BLOCK = 1 << 16


def generator(seed: int, trial: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial), int(stream)])))


class Streams:
    """The generators of one trial."""

    def __init__(self, seed: int = 0, trial: int = 0):
        if seed < 0 or trial < 0:
            raise ValueError("seed and trial must be nonnegative")
        self.seed = int(seed)
        self.trial = int(trial)
        self._gens: dict[int, np.random.Generator] = {}

    def get(self, stream: int) -> np.random.Generator:
        if stream not in self._gens:
            self._gens[stream] = generator(self.seed, self.trial, stream)
        return self._gens[stream]

    items = property(lambda self: self.get(ITEMS))
    coins = property(lambda self: self.get(COINS))
    imaginary = property(lambda self: self.get(IMAGINARY))
    adversary = property(lambda self: self.get(ADVERSARY))


def as_streams(rng) -> Streams:
    if rng is None:
        return Streams(0, 0)
    if isinstance(rng, Streams):
        return rng
    if isinstance(rng, (int, np.integer)):
        return Streams(int(rng), 0)
    if isinstance(rng, tuple) and len(rng) == 2:
        return Streams(*rng)
    raise TypeError(f"cannot build random streams from {rng!r}")


class CoinStream:
    """Biased coins from 63-bit uniforms: heads iff u < ceil(p * 2^63)."""

    def __init__(self, gen: np.random.Generator, block: int = BLOCK):
        self.gen = gen
        self.block = block
        self.buf = np.empty(0, dtype=np.uint64)
        self.pos = 0
        self.drawn = 0

    @staticmethod
    def threshold(p) -> int:
        """ceil(p * 2^63) for a rational 0 <= p <= 1."""
        num, den = p.numerator, p.denominator
        return -((-num << 63) // den)

    def _refill(self):
        self.buf = self.gen.integers(0, 1 << 63, size=self.block, dtype=np.uint64)
        self.pos = 0

    def until_tails(self, tails: int, p) -> np.ndarray:
        """Consume coins up to and including the ``tails``-th tail; True marks heads."""
        if tails <= 0:
            return np.zeros(0, dtype=bool)
        if p >= 1:
            raise ValueError("heads probability must be below 1")
        t = self.threshold(p)
        if t == 0:
            return np.zeros(tails, dtype=bool)
        tt = np.uint64(t)
        parts = []
        need = tails
        while need > 0:
            if self.pos >= self.buf.shape[0]:
                self._refill()
            heads = self.buf[self.pos :] < tt
            ctails = np.cumsum(~heads)
            if ctails.size and ctails[-1] >= need:
                k = int(np.searchsorted(ctails, need)) + 1
                parts.append(heads[:k])
                self.pos += k
                need = 0
            else:
                parts.append(heads)
                self.pos = self.buf.shape[0]
                need -= int(ctails[-1]) if ctails.size else 0
        out = np.concatenate(parts)
        self.drawn += out.shape[0]
        return out


class SizeStream:
    """Item sizes drawn in fixed blocks from an exact integer sampler."""

    def __init__(self, sampler, gen: np.random.Generator, block: int = BLOCK):
        self.sampler = sampler
        self.gen = gen
        self.block = block
        self.buf = np.empty(0, dtype=np.int32)
        self.pos = 0

    def take(self, n: int) -> np.ndarray:
        parts = []
        while n > 0:
            if self.pos >= self.buf.shape[0]:
                self.buf = self.sampler.draw(self.gen, self.block).astype(np.int32)
                self.pos = 0
            k = min(n, self.buf.shape[0] - self.pos)
            parts.append(self.buf[self.pos : self.pos + k])
            self.pos += k
            n -= k
        if not parts:
            return np.zeros(0, dtype=np.int32)
        return np.concatenate(parts)
