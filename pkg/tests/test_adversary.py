from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from sospack.adversary import (
    AdversaryPolicy,
    adversarial_stream,
    expected_ss_increase,
    greedy_ss_increase,
    make_policy,
    round_robin,
    switch_once,
)
from sospack.distribution import DiscreteDistribution as D, uniform_jk_family
from sospack.harness import ExperimentConfig, fit_records, run_experiment
from sospack.model import Packing, ss_value
from sospack.packers import make_packer
from sospack.rng import generator

from conftest import brute_profile_after, sq

ONES = D(9, (1,), (Fraction(1),))
F23 = D(9, (2, 3), (Fraction(1, 2), Fraction(1, 2)))


def test_singleton_family_is_iid():
    F = D.uniform_jk(5, 9)
    pol = greedy_ss_increase([F])
    run = adversarial_stream(pol, make_packer("ss", 9), 500, generator(0, 0, 3))
    gen = generator(0, 0, 3)
    sampler = F.sampler()
    want = [int(sampler.draw(gen, 1)[0]) for _ in range(500)]
    assert run.sizes == want
    assert set(run.members) == {0}


def test_ss_prime_trap():
    pol = switch_once([ONES, F23], prefix=1)
    a = make_packer("ss_prime", 9)
    run = adversarial_stream(pol, a, 5000, generator(1, 0, 3))
    assert run.sizes[0] == 1 and set(run.sizes[1:]) <= {2, 3}
    b = make_packer("ss", 9)
    b.feed(run.sizes)
    assert np.array_equal(a.profile.counts, b.profile.counts)
    assert a.D == set()


def test_family_restriction():
    fam = uniform_jk_family(9)
    for pol in (greedy_ss_increase(fam), round_robin(fam), switch_once(fam, 10)):
        run = adversarial_stream(pol, make_packer("ss", 9), 400, generator(2, 0, 3))
        assert all(fam[k].prob(s) > 0 for s, k in zip(run.sizes, run.members))


def test_round_robin_and_switch():
    fam = uniform_jk_family(6)
    run = adversarial_stream(round_robin(fam), make_packer("ss", 6), 8, generator(0, 0, 3))
    assert run.members == [0, 1, 2, 3, 0, 1, 2, 3]
    run = adversarial_stream(make_policy("switch_once:3", fam), make_packer("ss", 6), 6, generator(0, 0, 3))
    assert run.members == [0, 0, 0, 1, 1, 1]


def brute_expected(F, packer):
    """Expected ss increase by recomputing ss after the packer's own response."""
    p = packer.profile
    total = Fraction(0)
    for s, q in zip(F.sizes, F.probs):
        h = packer.choose(s)
        total += q * (sq(brute_profile_after(p, h, s)) - sq(p))
    return total


def test_greedy_matches_brute_force():
    fam = uniform_jk_family(8) + [D(8, (3, 5), (Fraction(1, 3), Fraction(2, 3)))]
    pol = greedy_ss_increase(fam)
    gen = np.random.default_rng(0)
    for _ in range(200):
        pk = make_packer(str(gen.choice(["ss", "bf", "sminh"])), 8)
        pk.feed(gen.integers(1, 9, int(gen.integers(0, 40))))
        scores = [brute_expected(F, pk) for F in fam]
        assert [expected_ss_increase(F, pk) for F in fam] == scores
        best = max(scores)
        assert pol.decide(0, [], pk) == scores.index(best)


def test_greedy_keeps_ss_waste_bounded():
    recs = run_experiment(
        ExperimentConfig("ss", 30000, family=uniform_jk_family(12), adversary="greedy_ss_increase", trials=3, seed=0)
    )
    fit = fit_records(recs)
    assert fit.alpha < 0.35
    assert max(float(cp.waste) for r in recs for cp in r.checkpoints) < 40


def test_perfectly_packable_family_sublinear():
    fam = [D.uniform_jk(j, 10) for j in (3, 6, 9)]
    recs = run_experiment(ExperimentConfig("ss", 20000, family=fam, adversary="greedy_ss_increase", trials=3, seed=4))
    assert fit_records(recs).alpha <= 0.65


def test_bad_inputs():
    with pytest.raises(ValueError):
        make_policy("nope", [F23])
    with pytest.raises(ValueError):
        make_policy("round_robin:2", [F23])
    with pytest.raises(ValueError):
        switch_once([F23])
    with pytest.raises(ValueError):
        adversarial_stream(round_robin([F23]), make_packer("ss", 10), 3, generator(0, 0, 3))
    with pytest.raises(ValueError):
        AdversaryPolicy([F23, D.uniform_jk(2, 5)], lambda *a: 0)
