"""Discrete item-size distributions with exact rational probabilities."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DistributionError(ValueError):
    pass


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, float):
        # floats are accepted only when they are exactly representable decimals
        return Fraction(repr(p))
    return Fraction(p)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Bin size ``B``, sizes ``s_1 < ... < s_J`` in ``[1, B]`` and exact probabilities.

    Zero probabilities are allowed; :attr:`support` drops them.
    """

    bin_size: int
    sizes: tuple[int, ...]
    probs: tuple[Fraction, ...]
    name: str | None = None

    def __post_init__(self):
        B = self.bin_size
        sizes = tuple(int(s) for s in self.sizes)
        probs = tuple(_as_fraction(p) for p in self.probs)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probs", probs)
        if not isinstance(B, int) or B < 1:
            raise DistributionError(f"bin size must be a positive integer, got {B!r}")
        if len(sizes) == 0:
            raise DistributionError("at least one item size is required")
        if len(sizes) != len(probs):
            raise DistributionError("sizes and probs differ in length")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise DistributionError(f"sizes must be strictly increasing: {sizes}")
        if sizes[0] < 1 or sizes[-1] > B:
            raise DistributionError(f"sizes must lie in [1, {B}]: {sizes}")
        if any(p < 0 for p in probs):
            raise DistributionError("probabilities must be nonnegative")
        if sum(probs) != 1:
            raise DistributionError(f"probabilities sum to {sum(probs)}, not 1")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_weights(cls, bin_size: int, weights: dict[int, int | Fraction], name=None):
        """Normalize nonnegative weights keyed by size."""
        items = sorted((int(s), Fraction(w)) for s, w in weights.items())
        total = sum(w for _, w in items)
        if total <= 0:
            raise DistributionError("weights must have a positive sum")
        return cls(bin_size, tuple(s for s, _ in items), tuple(w / total for _, w in items), name)

    @classmethod
    def uniform_jk(cls, j: int, k: int) -> "DiscreteDistribution":
        """U{j,k}: bin size k, sizes 1..j equally likely."""
        if not 1 <= j <= k:
            raise DistributionError(f"U{{j,k}} needs 1 <= j <= k, got j={j}, k={k}")
        return cls(k, tuple(range(1, j + 1)), (Fraction(1, j),) * j, f"U{{{j},{k}}}")

    @classmethod
    def interval_uniform(cls, lo: int, hi: int, bin: int) -> "DiscreteDistribution":
        """Sizes lo..hi equally likely in bins of size ``bin``."""
        if not 1 <= lo <= hi <= bin:
            raise DistributionError(f"interval uniform needs 1 <= lo <= hi <= bin, got {lo},{hi},{bin}")
        n = hi - lo + 1
        return cls(bin, tuple(range(lo, hi + 1)), (Fraction(1, n),) * n, f"U[{lo}..{hi}]/{bin}")

    @classmethod
    def point(cls, bin_size: int, size: int) -> "DiscreteDistribution":
        return cls(bin_size, (size,), (Fraction(1),))

    # -- derived quantities -------------------------------------------------

    @property
    def J(self) -> int:
        return len(self.sizes)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, p in zip(self.sizes, self.probs) if p > 0)

    def prob(self, size: int) -> Fraction:
        try:
            return self.probs[self.sizes.index(size)]
        except ValueError:
            return Fraction(0)

    def restricted_to_support(self) -> "DiscreteDistribution":
        if all(p > 0 for p in self.probs):
            return self
        pairs = [(s, p) for s, p in zip(self.sizes, self.probs) if p > 0]
        return DiscreteDistribution(
            self.bin_size, tuple(s for s, _ in pairs), tuple(p for _, p in pairs), self.name
        )

    @property
    def expected_size(self) -> Fraction:
        return sum((s * p for s, p in zip(self.sizes, self.probs)), Fraction(0))

    @property
    def common_denominator(self) -> int:
        return math.lcm(*(p.denominator for p in self.probs))

    def integer_weights(self) -> tuple[int, list[int]]:
        """Common denominator D and the integers D * p_j."""
        D = self.common_denominator
        return D, [int(p * D) for p in self.probs]

    def aug(self, r: Fraction) -> "DiscreteDistribution":
        """Mix in size-1 items: p_1 -> (p_1 + r)/(1 + r), p_j -> p_j/(1 + r)."""
        r = Fraction(r)
        if r < 0:
            raise DistributionError("aug needs r >= 0")
        sizes, probs = list(self.sizes), list(self.probs)
        if sizes[0] != 1:
            sizes.insert(0, 1)
            probs.insert(0, Fraction(0))
        probs = [(probs[0] + r) / (1 + r)] + [p / (1 + r) for p in probs[1:]]
        return DiscreteDistribution(self.bin_size, tuple(sizes), tuple(probs))

    def mixture(self, other: "DiscreteDistribution", weight: Fraction) -> "DiscreteDistribution":
        """(1 - weight) * self + weight * other, over the union of sizes."""
        if other.bin_size != self.bin_size:
            raise DistributionError("mixture components need a common bin size")
        weight = Fraction(weight)
        acc: dict[int, Fraction] = {}
        for s, p in zip(self.sizes, self.probs):
            acc[s] = acc.get(s, Fraction(0)) + (1 - weight) * p
        for s, p in zip(other.sizes, other.probs):
            acc[s] = acc.get(s, Fraction(0)) + weight * p
        keys = sorted(acc)
        return DiscreteDistribution(self.bin_size, tuple(keys), tuple(acc[k] for k in keys))

    # -- sampling -----------------------------------------------------------

    def sampler(self) -> "IntegerSampler":
        return IntegerSampler(self)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "bin_size": self.bin_size,
            "sizes": list(self.sizes),
            "probs": [f"{p.numerator}/{p.denominator}" for p in self.probs],
        }
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteDistribution":
        if not isinstance(obj, dict):
            raise DistributionError(f"distribution must be a JSON object, got {type(obj).__name__}")
        if "uniform_jk" in obj:
            spec = obj["uniform_jk"]
            return cls.uniform_jk(int(spec["j"]), int(spec["k"]))
        if "interval_uniform" in obj:
            spec = obj["interval_uniform"]
            return cls.interval_uniform(int(spec["lo"]), int(spec["hi"]), int(spec["bin"]))
        try:
            B = obj["bin_size"]
            sizes = obj["sizes"]
            probs = obj["probs"]
        except KeyError as exc:
            raise DistributionError(f"missing field {exc.args[0]!r}") from None
        try:
            fr = tuple(Fraction(str(p)) for p in probs)
        except (ValueError, ZeroDivisionError) as exc:
            raise DistributionError(f"bad probability: {exc}") from None
        return cls(int(B), tuple(int(s) for s in sizes), fr, obj.get("name"))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        ps = ",".join(f"{p.numerator}/{p.denominator}" for p in self.probs)
        return f"B={self.bin_size};s={','.join(map(str, self.sizes))};p={ps}"


class IntegerSampler:
    """Exact inverse-CDF sampling: draw u uniformly in [0, D), map through integer weights."""

    def __init__(self, dist: DiscreteDistribution):
        D, w = dist.integer_weights()
        if D >= 2**62:
            raise DistributionError("probability denominators too large for exact sampling")
        self.D = D
        self.sizes = np.asarray(dist.sizes, dtype=np.int32)
        self.cum = np.cumsum(np.asarray(w, dtype=np.int64))

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.integers(0, self.D, size=n, dtype=np.int64)
        return self.sizes[np.searchsorted(self.cum, u, side="right")]


def load_distribution(path: str | Path) -> DiscreteDistribution:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DistributionError(f"{path}: {exc}") from None
    return DiscreteDistribution.from_json(obj)


def load_family(path: str | Path) -> list[DiscreteDistribution]:
    """A JSON list of distributions, ``{"family": [...]}``, or ``{"uniform_jk_bounded": {"k": k}}``."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DistributionError(f"{path}: {exc}") from None
    if isinstance(obj, dict) and "uniform_jk_bounded" in obj:
        k = int(obj["uniform_jk_bounded"]["k"])
        return uniform_jk_family(k)
    if isinstance(obj, dict) and "family" in obj:
        obj = obj["family"]
    if not isinstance(obj, list) or not obj:
        raise DistributionError("family file must hold a nonempty list of distributions")
    fam = [DiscreteDistribution.from_json(o) for o in obj]
    check_family(fam)
    return fam


def uniform_jk_family(k: int) -> list[DiscreteDistribution]:
    """All U{j,k} with 1 <= j <= k-2."""
    if k < 3:
        raise DistributionError("the bounded U{j,k} family needs k >= 3")
    return [DiscreteDistribution.uniform_jk(j, k) for j in range(1, k - 1)]


def check_family(family: Sequence[DiscreteDistribution]) -> None:
    if not family:
        raise DistributionError("family is empty")
    Bs = {f.bin_size for f in family}
    if len(Bs) != 1:
        raise DistributionError(f"family members have different bin sizes: {sorted(Bs)}")


def distribution_union_sizes(dists: Iterable[DiscreteDistribution]) -> list[int]:
    out: set[int] = set()
    for d in dists:
        out.update(d.support)
    return sorted(out)
