from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sospack.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, ExactSimplex, SingularBasis, SparseLU, solve_exact, to_fraction


def dense_to_cols(A):
    m, n = len(A), len(A[0])
    return [{r: A[r][j] for r in range(m) if A[r][j]} for j in range(n)]


def vertex_optimum(A, b, c):
    """Minimum of c.x over basic feasible solutions, by enumerating column subsets."""
    m, n = len(A), len(A[0])
    best = None
    for cols in combinations(range(n), m):
        M = [[Fraction(A[r][j]) for j in cols] + [Fraction(b[r])] for r in range(m)]
        ok = True
        for k in range(m):
            piv = next((r for r in range(k, m) if M[r][k] != 0), None)
            if piv is None:
                ok = False
                break
            M[k], M[piv] = M[piv], M[k]
            for r in range(m):
                if r != k and M[r][k]:
                    f = M[r][k] / M[k][k]
                    M[r] = [a - f * e for a, e in zip(M[r], M[k])]
        if not ok:
            continue
        x = [M[k][m] / M[k][k] for k in range(m)]
        if any(v < 0 for v in x):
            continue
        val = sum(c[j] * v for j, v in zip(cols, x))
        if best is None or val < best:
            best = val
    return best


def test_tiny_known():
    # min -x1 - x2  s.t.  x1 + 2 x2 + s1 = 4,  3 x1 + x2 + s2 = 6
    A = [[1, 2, 1, 0], [3, 1, 0, 1]]
    res = solve_exact(dense_to_cols(A), [4, 6], [-1, -1, 0, 0], 2)
    assert res.status == OPTIMAL
    assert to_fraction(res.objective) == Fraction(-14, 5)
    assert [to_fraction(v) for v in res.x[:2]] == [Fraction(8, 5), Fraction(6, 5)]


def test_infeasible():
    # x1 + x2 = -1 with x >= 0
    res = solve_exact(dense_to_cols([[1, 1]]), [-1], [0, 0], 1, warm_start=False)
    assert res.status == INFEASIBLE


def test_unbounded():
    # min -x1  s.t.  x1 - x2 = 1
    res = solve_exact(dense_to_cols([[1, -1]]), [1], [-1, 0], 1)
    assert res.status == UNBOUNDED


def test_degenerate_terminates():
    # a classic cycling example under the largest-coefficient rule (Beale)
    A = [
        [Fraction(1, 4), -8, -1, 9, 1, 0, 0],
        [Fraction(1, 2), -12, Fraction(-1, 2), 3, 0, 1, 0],
        [0, 0, 1, 0, 0, 0, 1],
    ]
    c = [Fraction(-3, 4), 20, Fraction(-1, 2), 6, 0, 0, 0]
    for warm in (False, True):
        res = solve_exact(dense_to_cols(A), [0, 0, 1], c, 3, warm_start=warm)
        assert res.status == OPTIMAL
        assert to_fraction(res.objective) == Fraction(-5, 4)


@settings(max_examples=60)
@given(st.integers(1, 3), st.integers(2, 5), st.integers(0, 10**9))
def test_random_vs_vertices(m, extra, seed):
    gen = np.random.default_rng(seed)
    n = m + extra
    A = gen.integers(-2, 4, (m, n)).tolist()
    x0 = gen.integers(0, 3, n)
    b = (np.asarray(A) @ x0).tolist()  # feasible by construction
    c = gen.integers(0, 5, n).tolist()  # nonnegative costs keep it bounded
    want = vertex_optimum(A, b, c)
    for warm in (False, True):
        res = solve_exact(dense_to_cols(A), b, c, m, warm_start=warm)
        if want is None:
            # rank-deficient systems can still be feasible; the cost is then >= 0
            assert res.status == OPTIMAL
            continue
        assert res.status == OPTIMAL
        assert to_fraction(res.objective) == want


@settings(max_examples=60)
@given(st.integers(1, 6), st.integers(0, 10**9))
def test_lu_solves(m, seed):
    gen = np.random.default_rng(seed)
    while True:
        M = gen.integers(-3, 4, (m, m))
        if round(abs(np.linalg.det(M))) > 0:
            break
    cols = [{r: int(M[r, k]) for r in range(m) if M[r, k]} for k in range(m)]
    lu = SparseLU(cols, m)
    b = gen.integers(-5, 6, m).tolist()
    x = [to_fraction(v) for v in lu.solve(b)]
    assert [sum(int(M[r, k]) * x[k] for k in range(m)) for r in range(m)] == b
    y = [to_fraction(v) for v in lu.solve_t(b)]
    assert [sum(int(M[r, k]) * y[r] for r in range(m)) for k in range(m)] == b


def test_singular():
    with pytest.raises(SingularBasis):
        SparseLU([{0: 1, 1: 2}, {0: 2, 1: 4}], 2)


def test_bad_hint_falls_back():
    A = [[1, 2, 1, 0], [3, 1, 0, 1]]
    spx = ExactSimplex(dense_to_cols(A), [4, 6], [-1, -1, 0, 0], 2)
    res = spx.solve(hint=[0, 0])  # not a basis
    assert res.status == OPTIMAL and not res.warm_started
    assert to_fraction(res.objective) == Fraction(-14, 5)
