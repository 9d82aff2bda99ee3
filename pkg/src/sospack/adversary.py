"""Adversarial item streams: each step an adversary picks which family member
the next item is drawn from, after looking at the current profile."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .distribution import DiscreteDistribution, check_family
from .model import ss_change


@dataclass
class AdversaryPolicy:
    """``decide(step, history, packer) -> member index``."""

    family: Sequence[DiscreteDistribution]
    decide: Callable
    name: str = "custom"

    def __post_init__(self):
        check_family(self.family)
        self.family = list(self.family)
        self.B = self.family[0].bin_size


def expected_ss_increase(dist: DiscreteDistribution, packer, choices: dict | None = None) -> Fraction:
    """E[change in ss] when the next item comes from ``dist`` and the packer responds."""
    counts, B = packer.packing.counts, packer.B
    out = Fraction(0)
    for s, p in zip(dist.sizes, dist.probs):
        if not p:
            continue
        h = choices[s] if choices is not None else packer.choose(s)
        out += p * ss_change(counts, B, h, s)
    return out


def greedy_ss_increase(family) -> AdversaryPolicy:
    """Member with the largest expected one-step ss increase; ties to the lowest index.

    Expectations are compared exactly as integers: probabilities are scaled by
    a common denominator into a member-by-size weight matrix.
    """
    family = list(family)
    sizes = sorted({s for d in family for s in d.support})
    L = math.lcm(*(p.denominator for d in family for p in d.probs))
    W = np.array([[int(d.prob(s) * L) for s in sizes] for d in family], dtype=object)

    def decide(step, history, packer):
        counts, B = packer.packing.counts, packer.B
        deltas = np.array([ss_change(counts, B, packer.choose(s), s) for s in sizes], dtype=object)
        return int(np.argmax(W.dot(deltas)))

    return AdversaryPolicy(family, decide, "greedy_ss_increase")


def switch_once(family, prefix: int = 1) -> AdversaryPolicy:
    """Member 0 for the first ``prefix`` items, member 1 afterwards."""
    if len(family) < 2:
        raise ValueError("switch_once needs at least two family members")
    return AdversaryPolicy(family, lambda step, history, packer: 0 if step < prefix else 1, "switch_once")


def round_robin(family) -> AdversaryPolicy:
    k = len(family)
    return AdversaryPolicy(family, lambda step, history, packer: step % k, "round_robin")


BUILTIN = {
    "greedy_ss_increase": greedy_ss_increase,
    "switch_once": switch_once,
    "round_robin": round_robin,
}


def make_policy(name: str, family) -> AdversaryPolicy:
    base, _, arg = name.partition(":")
    if base not in BUILTIN:
        raise ValueError(f"unknown adversary {name!r}; choose from {sorted(BUILTIN)}")
    if base == "switch_once" and arg:
        return switch_once(family, int(arg))
    if arg:
        raise ValueError(f"adversary {base} takes no parameter")
    return BUILTIN[base](family)


@dataclass
class AdversaryRun:
    sizes: list = field(default_factory=list)
    members: list = field(default_factory=list)


def adversarial_stream(policy: AdversaryPolicy, packer, n: int, gen: np.random.Generator, on_step=None) -> AdversaryRun:
    """Alternate choice and packing for n items; ``on_step(i)`` runs after item i is packed."""
    if packer.B != policy.B:
        raise ValueError(f"packer bin size {packer.B} differs from the family's {policy.B}")
    samplers = [d.sampler() for d in policy.family]
    run = AdversaryRun()
    for step in range(n):
        k = policy.decide(step, run.sizes, packer)
        s = int(samplers[k].draw(gen, 1)[0])
        if policy.family[k].prob(s) <= 0:  # pragma: no cover - sampler never draws p = 0
            raise AssertionError("emitted a size outside the chosen member's support")
        packer.pack(s)
        run.sizes.append(s)
        run.members.append(k)
        if on_step is not None:
            on_step(step + 1)
    return run
