import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sospack.distribution import (
    DiscreteDistribution as D,
    DistributionError,
    load_distribution,
    load_family,
    uniform_jk_family,
)
from sospack.rng import CoinStream, SizeStream, Streams, as_streams, generator


class TestDistribution:
    def test_invariants(self):
        for bad in [
            dict(bin_size=5, sizes=(2, 2), probs=("1/2", "1/2")),
            dict(bin_size=5, sizes=(6,), probs=(1,)),
            dict(bin_size=5, sizes=(1, 2), probs=("1/2", "1/3")),
            dict(bin_size=5, sizes=(1,), probs=(-1,)),
            dict(bin_size=0, sizes=(1,), probs=(1,)),
        ]:
            with pytest.raises(DistributionError):
                D(bad["bin_size"], bad["sizes"], tuple(Fraction(p) for p in bad["probs"]))

    def test_zero_probability_allowed(self):
        F = D(9, (1, 2), (Fraction(0), Fraction(1)))
        assert F.support == (2,)

    def test_json_roundtrip(self, tmp_path):
        F = D(9, (2, 3), (Fraction(1, 3), Fraction(2, 3)), "x")
        p = tmp_path / "f.json"
        p.write_text(json.dumps(F.to_json()))
        assert load_distribution(p) == F

    def test_shorthands(self):
        assert D.from_json({"uniform_jk": {"j": 3, "k": 7}}) == D.uniform_jk(3, 7)
        F = D.from_json({"interval_uniform": {"lo": 18, "hi": 20, "bin": 100}})
        assert F.sizes == (18, 19, 20) and F.bin_size == 100

    def test_bad_json(self, tmp_path):
        p = tmp_path / "f.json"
        p.write_text("{")
        with pytest.raises(DistributionError):
            load_distribution(p)
        with pytest.raises(DistributionError):
            D.from_json({"bin_size": 3})

    def test_family(self, tmp_path):
        p = tmp_path / "fam.json"
        p.write_text(json.dumps({"uniform_jk_bounded": {"k": 12}}))
        fam = load_family(p)
        assert [f.J for f in fam] == list(range(1, 11))
        p.write_text(json.dumps([D.uniform_jk(2, 5).to_json(), D.uniform_jk(2, 6).to_json()]))
        with pytest.raises(DistributionError):
            load_family(p)
        assert uniform_jk_family(4)[-1] == D.uniform_jk(2, 4)

    def test_aug(self):
        F = D(3, (2,), (Fraction(1),))
        G = F.aug(1)
        assert G.sizes == (1, 2) and G.probs == (Fraction(1, 2), Fraction(1, 2))
        assert F.aug(0).probs == (0, 1)

    @given(st.integers(2, 30), st.dictionaries(st.integers(1, 30), st.integers(1, 9), min_size=1, max_size=5))
    def test_integer_weights(self, B, w):
        w = {s: v for s, v in w.items() if s <= B} or {1: 1}
        F = D.from_weights(B, w)
        den, ints = F.integer_weights()
        assert sum(ints) == den
        assert [Fraction(i, den) for i in ints] == list(F.probs)

    def test_sampler_frequencies(self):
        F = D(10, (1, 3, 4), (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)))
        xs = F.sampler().draw(np.random.default_rng(0), 60000)
        freq = [np.mean(xs == s) for s in F.sizes]
        assert np.allclose(freq, [1 / 2, 1 / 3, 1 / 6], atol=0.01)

    def test_sampler_skips_zero_mass(self):
        F = D(10, (1, 3, 4), (Fraction(0), Fraction(1, 2), Fraction(1, 2)))
        assert 1 not in F.sampler().draw(np.random.default_rng(0), 5000)


class TestRng:
    def test_streams_independent_and_repeatable(self):
        a = Streams(3, 1).items.integers(0, 2**62, 4)
        b = Streams(3, 1).items.integers(0, 2**62, 4)
        c = Streams(3, 2).items.integers(0, 2**62, 4)
        d = Streams(3, 1).coins.integers(0, 2**62, 4)
        assert (a == b).all() and not (a == c).all() and not (a == d).all()

    def test_as_streams(self):
        assert as_streams(None).seed == 0
        assert as_streams(5).seed == 5
        assert as_streams((5, 2)).trial == 2
        with pytest.raises(TypeError):
            as_streams("x")
        with pytest.raises(ValueError):
            Streams(-1, 0)

    def test_coin_threshold_exact(self):
        assert CoinStream.threshold(Fraction(1, 2)) == 2**62
        assert CoinStream.threshold(Fraction(1, 3)) == -(-(2**63) // 3)
        assert CoinStream.threshold(Fraction(0)) == 0

    def test_until_tails(self):
        cs = CoinStream(generator(0, 0, 1), block=64)
        out = cs.until_tails(1000, Fraction(1, 2))
        assert (~out).sum() == 1000 and not out[-1]
        assert abs(out.mean() - 0.5) < 0.05
        assert cs.until_tails(5, Fraction(0)).tolist() == [False] * 5
        with pytest.raises(ValueError):
            cs.until_tails(3, Fraction(1))

    def test_until_tails_chunking(self):
        a = CoinStream(generator(0, 0, 1), block=50)
        b = CoinStream(generator(0, 0, 1), block=50)
        whole = a.until_tails(300, Fraction(2, 3))
        parts = np.concatenate([b.until_tails(k, Fraction(2, 3)) for k in (1, 99, 7, 193)])
        assert np.array_equal(whole, parts)

    def test_size_stream_chunking(self):
        F = D.uniform_jk(5, 9)
        a = SizeStream(F.sampler(), generator(1, 0, 0), block=100)
        b = SizeStream(F.sampler(), generator(1, 0, 0), block=100)
        whole = a.take(1000)
        parts = np.concatenate([b.take(k) for k in (3, 500, 0, 497)])
        assert np.array_equal(whole, parts)
