import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sospack.distribution import DiscreteDistribution as D
from sospack.harness import (
    BOUNDED,
    CSV_COLUMNS,
    LINEAR,
    LOG,
    SQRT,
    ConfigError,
    ExperimentConfig,
    InsufficientData,
    emit,
    fit_growth,
    geometric_checkpoints,
    parse_checkpoints,
    run_experiment,
    to_csv,
    to_json,
)

F5 = D(11, (2,), (Fraction(1),))
NS = [int(1000 * 2**k) for k in range(12)]


class TestRun:
    def test_staircase_example(self):
        (rec,) = run_experiment(ExperimentConfig("ss", 110, dist=F5, checkpoints=[110]))
        cp = rec.final
        assert cp.bins == 30 and cp.waste == 10

    def test_same_seed_same_records(self):
        F = D.uniform_jk(5, 9)
        a = run_experiment(ExperimentConfig("ss", 3000, dist=F, trials=2, seed=3))
        b = run_experiment(ExperimentConfig("ss", 3000, dist=F, trials=2, seed=3))
        assert to_csv(a) == to_csv(b)
        assert a[0].checkpoints != a[1].checkpoints

    def test_jobs_do_not_change_output(self):
        F = D.uniform_jk(7, 10)
        outs = {to_csv(run_experiment(ExperimentConfig("ss", 5000, dist=F, trials=4, seed=1, jobs=j))) for j in (1, 2, 4)}
        assert len(outs) == 1

    def test_checkpoint_waste_matches_profile(self):
        F = D.uniform_jk(6, 13)
        (rec,) = run_experiment(ExperimentConfig("ss", 4000, dist=F, keep_profiles=True, checkpoints=[10, 100, 4000]))
        for cp in rec.checkpoints:
            gap = sum(n * (13 - h) for h, n in cp.profile.items())
            assert cp.waste == Fraction(gap, 13)
        bins = [cp.bins for cp in rec.checkpoints]
        assert bins == sorted(bins)

    def test_timing(self):
        (rec,) = run_experiment(ExperimentConfig("ss", 100, dist=F5, timing=True, checkpoints=[50, 100]))
        assert all(cp.elapsed_ms is not None and cp.elapsed_ms >= 0 for cp in rec.checkpoints)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(n=0),
            dict(trials=0),
            dict(checkpoints=[5, 5]),
            dict(checkpoints=[200]),
            dict(dist=None),
            dict(jobs=0),
            dict(seed=-1),
        ],
    )
    def test_validation(self, kw):
        base = dict(alg="ss", n=100, dist=F5)
        base.update(kw)
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig(**base))


class TestCheckpoints:
    def test_default(self):
        cp = geometric_checkpoints(10**6)
        assert len(cp) == 12 and cp[-1] == 10**6 and cp[0] == math.ceil(10**6 / 2048)

    def test_parse(self):
        assert parse_checkpoints("geom:3", 8) == (2, 4, 8)
        assert parse_checkpoints("1,5,9", 9) == (1, 5, 9)
        for bad in ("geom:x", "geom:0", "a,b"):
            with pytest.raises(ConfigError):
                parse_checkpoints(bad, 9)


class TestFit:
    def test_constant(self):
        assert fit_growth([(n, 7) for n in NS]).cls == BOUNDED

    def test_sqrt(self):
        f = fit_growth([(n, 2 * math.sqrt(n)) for n in NS])
        assert f.cls == SQRT and abs(f.alpha - 0.5) < 1e-9

    def test_linear(self):
        f = fit_growth([(n, 0.09 * n) for n in NS])
        assert f.cls == LINEAR and abs(f.alpha - 1) < 1e-9

    def test_log(self):
        gen = np.random.default_rng(0)
        pts = [(n, 1 + 0.5 * math.log(n) + gen.normal(0, 0.05)) for n in NS for _ in range(5)]
        assert fit_growth(pts).cls == LOG

    @given(st.floats(1e-3, 1e3))
    def test_scale_free(self, a):
        assert fit_growth([(n, 7 * a) for n in NS]).cls == BOUNDED
        assert fit_growth([(n, a * math.sqrt(n)) for n in NS]).cls == SQRT
        assert fit_growth([(n, a * n) for n in NS]).cls == LINEAR

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            fit_growth([(n, 1) for n in NS[:4]])
        with pytest.raises(InsufficientData):
            fit_growth([(n, 1) for n in range(10, 20, 2)])

    def test_deterministic(self):
        pts = [(n, math.sqrt(n) + (n % 7)) for n in NS]
        assert fit_growth(pts) == fit_growth(list(pts))


class TestEmit:
    def test_empty(self):
        assert emit([], "csv") == ",".join(CSV_COLUMNS) + "\n"
        assert json.loads(emit([], "json")) == []

    def test_rational_fields(self, tmp_path):
        recs = run_experiment(ExperimentConfig("ss", 110, dist=F5, checkpoints=[110]))
        text = emit(recs, "csv", tmp_path / "o.csv")
        rows = list(csv.DictReader(io.StringIO(text)))
        assert text.split("\n")[0].split(",") == list(CSV_COLUMNS)
        (vals,) = rows
        assert (vals["waste_num"], vals["waste_den"], vals["waste_float"]) == ("10", "1", "10.0")
        assert (tmp_path / "o.csv").read_text() == text
        j = json.loads(to_json(recs))[0]
        assert j["waste_num"] == 10 and j["waste_den"] == 1 and j["waste_float"] == 10.0

    def test_bad_format(self):
        with pytest.raises(ConfigError):
            emit([], "xml")
