from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sospack.distribution import DiscreteDistribution as D
from sospack.oracle import cone_membership, perfect_configs
from sospack.wastelp import (
    BOUNDED,
    INF,
    LINEAR,
    SQRT,
    NotPerfectlyPackable,
    augmented,
    build_waste_lp,
    classification_json,
    classify,
    doublestar_stream,
    gap_distribution,
    gap_rates,
    ideal_packing_template,
    interior_values,
    solve_lp,
    waste_constant,
)

from lp_oracle import pattern_lp_value

F1 = D(3, (2,), (Fraction(1),))


def Fk(k):
    return D(2 * k + 1, (2,), (Fraction(1),))


@st.composite
def small_dists(draw, max_B=10, max_J=3):
    B = draw(st.integers(2, max_B))
    sizes = sorted(draw(st.sets(st.integers(1, B), min_size=1, max_size=max_J)))
    w = [draw(st.integers(1, 6)) for _ in sizes]
    return D.from_weights(B, dict(zip(sizes, w)))


class TestBuild:
    def test_f1(self):
        lp = build_waste_lp(F1)
        assert lp.n_vars == 3
        assert lp.fixed_zero == [(0, 2)]
        assert lp.var_keys == [(0, 0), (0, 1)]
        cols, b, _ = lp.standard_form()
        # size row: v(1,0) + v(1,1) = 1 (scaled by D = 1)
        assert [c.get(0, 0) for c in cols[:2]] == [1, 1] and b[0] == 1

    @pytest.mark.parametrize("F", [F1, D.uniform_jk(8, 11), D.uniform_jk(1, 2)])
    def test_flux_rows(self, F):
        assert build_waste_lp(F).n_flux_rows == F.bin_size - 1

    def test_u12(self):
        lp = build_waste_lp(D.uniform_jk(2, 2))
        assert lp.n_vars == 4
        assert (1, 1) in lp.fixed_zero


class TestSolve:
    def test_f1(self):
        sol = solve_lp(build_waste_lp(F1))
        assert sol.objective == 1
        assert sol.value(0, 0) == 1

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_fk(self, k):
        # OPT packs k twos per bin leaving gap 1: waste per item 1/k in size units
        assert waste_constant(Fk(k)) == Fraction(1, k)

    def test_u8_11(self):
        assert waste_constant(D.uniform_jk(8, 11)) == 0

    def test_solution_is_exact(self):
        sol = solve_lp(build_waste_lp(D.from_weights(13, {3: 2, 5: 1, 7: 4})))
        assert all(r == 0 for r in sol.residuals())
        assert 0 <= sol.objective < 13 - 1

    @settings(max_examples=40)
    @given(small_dists(max_B=8, max_J=2))
    def test_pattern_oracle(self, F):
        assert waste_constant(F) == pattern_lp_value(F.bin_size, F.sizes, F.probs)

    @settings(max_examples=25)
    @given(small_dists(max_B=10, max_J=3))
    def test_warm_equals_cold(self, F):
        assert waste_constant(F, warm_start=True) == waste_constant(F, warm_start=False)

    @settings(max_examples=40)
    @given(small_dists(), st.integers(2, 7))
    def test_scale_invariance(self, F, k):
        G = D.from_weights(F.bin_size, {s: p * k for s, p in zip(F.sizes, F.probs)})
        assert waste_constant(G) == waste_constant(F)

    @settings(max_examples=60)
    @given(small_dists())
    def test_cone_agrees(self, F):
        cone = cone_membership(F.probs, perfect_configs(F.bin_size, F.sizes))
        assert cone == (waste_constant(F) == 0)


class TestInterior:
    def test_u8_11_bounded(self):
        assert all(v > 0 for v in interior_values(D.uniform_jk(8, 11)))

    def test_u99_100(self):
        F = D.uniform_jk(99, 100)
        cls = classify(F)
        assert cls.kind == SQRT and cls.c == 0

    def test_b9_23(self):
        F = D(9, (2, 3), (Fraction(1, 2), Fraction(1, 2)))
        vals = interior_values(F)
        assert vals == [1, INF]
        assert all(v > 0 for v in vals)

    def test_linear_has_no_interior(self):
        with pytest.raises(NotPerfectlyPackable):
            interior_values(F1)

    def test_zero_probability_is_ignored(self):
        F = D(9, (1, 2, 3), (Fraction(0), Fraction(1, 2), Fraction(1, 2)))
        assert len(interior_values(F)) == 2
        assert classify(F).kind == BOUNDED


class TestClassify:
    def test_f1(self):
        cls = classify(F1)
        assert cls.kind == LINEAR and cls.c == 1

    @pytest.mark.parametrize("j", [8, 9])
    def test_bounded(self, j):
        assert classify(D.uniform_jk(j, 11)).kind == BOUNDED

    def test_u9_12(self):
        assert classify(D.uniform_jk(9, 12)).kind == BOUNDED

    def test_u10_11(self):
        assert classify(D.uniform_jk(10, 11)).kind == SQRT

    def test_json(self):
        cls = classify(D(9, (2, 3), (Fraction(1, 2), Fraction(1, 2))), all_interior=True)
        out = classification_json(D(9, (2, 3), (Fraction(1, 2), Fraction(1, 2))), cls)
        assert out == {"c": "0/1", "class": BOUNDED, "c_i": ["1/1", "inf"], "dead_end_levels": [8]}

    @settings(max_examples=30)
    @given(small_dists())
    def test_aug_zero_identity(self, F):
        assert classify(F.aug(0)).kind == classify(F).kind


class TestGaps:
    def test_f1(self):
        g = gap_rates(solve_lp(build_waste_lp(F1)))
        assert g.nonzero() == {2: 1} and g.T == 1
        G = gap_distribution(g)
        assert G.sizes == (1,) and G.probs == (1,)

    def test_f3(self):
        g = gap_rates(solve_lp(build_waste_lp(Fk(3))))
        assert g.nonzero() == {6: Fraction(1, 3)} and g.T == Fraction(1, 3)

    @pytest.mark.parametrize("F", [D.uniform_jk(8, 11), D.uniform_jk(10, 11)])
    def test_perfect_has_no_gaps(self, F):
        g = gap_rates(solve_lp(build_waste_lp(F)))
        assert g.T == 0 and g.nonzero() == {}

    @settings(max_examples=30)
    @given(small_dists())
    def test_objective_consistency(self, F):
        sol = solve_lp(build_waste_lp(F))
        g = gap_rates(sol)
        assert sum((F.bin_size - h) * d for h, d in enumerate(g.delta)) == sol.objective
        assert g.T <= 1

    @settings(max_examples=30)
    @given(small_dists())
    def test_augmented_streams_perfect(self, F):
        sol = solve_lp(build_waste_lp(F))
        assert waste_constant(augmented(F, sol.objective)) == 0
        assert waste_constant(doublestar_stream(F, gap_rates(sol))) == 0


class TestTemplate:
    def test_f1(self):
        t = ideal_packing_template(solve_lp(build_waste_lp(F1)))
        assert t.N == 1 and t.instructions == [(0, 2, 1)]
        assert t.gap_total == 1 and t.waste == Fraction(1, 3)

    def test_f3(self):
        t = ideal_packing_template(solve_lp(build_waste_lp(Fk(3))))
        assert t.N == 3
        assert t.instructions == [(0, 2, 1), (2, 2, 1), (4, 2, 1)]
        assert t.final_profile == {6: 1}
        assert Fraction(t.gap_total, t.N) == Fraction(1, 3)

    def test_perfect(self):
        t = ideal_packing_template(solve_lp(build_waste_lp(D.uniform_jk(2, 2))))
        assert t.gap_total == 0 and t.final_profile == {}

    @settings(max_examples=20)
    @given(small_dists())
    def test_feasible_and_exact(self, F):
        sol = solve_lp(build_waste_lp(F))
        t = ideal_packing_template(sol)
        assert Fraction(t.gap_total, t.N) == sol.objective
        assert t.waste == Fraction(t.gap_total, F.bin_size)
        items = sum(n for _, _, n in t.instructions)
        assert items == t.N
