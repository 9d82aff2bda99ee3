"""Independent exact oracle for c(F): the bin-pattern LP solved by vertex enumeration.

minimize sum_P y_P (B - size(P))  subject to  sum_P y_P count_j(P) = p_j, y >= 0.
An optimum sits at a basic solution with at most J patterns in support, so
trying every set of at most J patterns is exhaustive.
"""

from fractions import Fraction
from itertools import combinations


def patterns(B, sizes):
    out = []

    def rec(k, room, cur):
        if k == len(sizes):
            if any(cur):
                out.append(tuple(cur))
            return
        for t in range(room // sizes[k] + 1):
            cur.append(t)
            rec(k + 1, room - t * sizes[k], cur)
            cur.pop()

    rec(0, B, [])
    return out


def _solve_square(A, b):
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def _solve_least(A_cols, p):
    """Exact y >= 0 with sum_k y_k col_k = p for |cols| <= J, via a square subsystem."""
    J, k = len(p), len(A_cols)
    rows = [[c[j] for c in A_cols] for j in range(J)]
    for sel in combinations(range(J), k):
        y = _solve_square([rows[j] for j in sel], [p[j] for j in sel])
        if y is None:
            continue
        if all(sum(rows[j][i] * y[i] for i in range(k)) == p[j] for j in range(J)):
            return y
    return None


def pattern_lp_value(B, sizes, probs):
    pats = patterns(B, sizes)
    p = [Fraction(x) for x in probs]
    J = len(sizes)
    best = None
    for k in range(1, J + 1):
        for combo in combinations(pats, k):
            y = _solve_least(combo, p)
            if y is None or any(v < 0 for v in y):
                continue
            val = sum(v * (B - sum(c * s for c, s in zip(P, sizes))) for v, P in zip(y, combo))
            if best is None or val < best:
                best = val
    return best
