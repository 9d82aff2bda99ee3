"""Independent ground truth: exact OPT, perfect configurations, cone membership.

Nothing here uses the waste-LP solver, so these functions can check it.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from typing import Iterable, Sequence


class SizeLimitExceeded(RuntimeError):
    pass


# -- exact OPT -------------------------------------------------------------------


def _completions(sizes, counts, room):
    """Maximal multisets (as count vectors) of the remaining items fitting in ``room``.

    ``sizes`` is descending.  A completion is maximal when no leftover item fits.
    """
    J = len(sizes)
    take = [0] * J

    def rec(k, room):
        if k == J:
            for j in range(J):
                if counts[j] > take[j] and sizes[j] <= room:
                    return
            yield tuple(take)
            return
        s = sizes[k]
        hi = min(counts[k], room // s)
        for t in range(hi, -1, -1):
            take[k] = t
            yield from rec(k + 1, room - t * s)
        take[k] = 0

    yield from rec(0, room)


def exact_opt(items: Iterable[int], B: int, node_budget: int = 2_000_000) -> int:
    """Minimum number of bins, by branch and bound over maximal bin completions.

    The largest remaining item always opens the next bin; results are memoized on
    the remaining count vector.  Raises SizeLimitExceeded past ``node_budget``
    search nodes.
    """
    items = [int(x) for x in items]
    if any(not 1 <= x <= B for x in items):
        raise ValueError(f"item sizes must lie in [1, {B}]")
    if not items:
        return 0
    sizes = sorted(set(items), reverse=True)
    start = tuple(items.count(s) for s in sizes)
    memo: dict[tuple, int] = {}
    nodes = 0

    def lower(counts):
        total = sum(c * s for c, s in zip(counts, sizes))
        big = sum(c for c, s in zip(counts, sizes) if 2 * s > B)
        return max(-(-total // B), big)

    def solve(counts):
        nonlocal nodes
        if not any(counts):
            return 0
        if counts in memo:
            return memo[counts]
        nodes += 1
        if nodes > node_budget:
            raise SizeLimitExceeded(f"exact_opt exceeded {node_budget} nodes")
        lb = lower(counts)
        k = next(j for j, c in enumerate(counts) if c)
        rest = list(counts)
        rest[k] -= 1
        best = math.inf
        for take in _completions(sizes, rest, B - sizes[k]):
            nxt = tuple(r - t for r, t in zip(rest, take))
            if 1 + lower(nxt) >= best:
                continue
            v = 1 + solve(nxt)
            if v < best:
                best = v
                if best == lb:
                    break
        memo[counts] = best
        return best

    return solve(start)


# -- perfect packing configurations ----------------------------------------------


def perfect_configs(B: int, sizes: Sequence[int], limit: int = 1_000_000) -> list[tuple[int, ...]]:
    """All b >= 0 with sum_j b_j s_j = B, in increasing lexicographic order."""
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if any(s < 1 for s in sizes):
        raise ValueError("sizes must be positive")
    J = len(sizes)
    out: list[tuple[int, ...]] = []
    b = [0] * J
    # reach[k][r]: residual r can be made from sizes[k:]
    reach = [[False] * (B + 1) for _ in range(J + 1)]
    reach[J][0] = True
    for k in range(J - 1, -1, -1):
        s = sizes[k]
        for r in range(B + 1):
            reach[k][r] = reach[k + 1][r] or (r >= s and reach[k][r - s])

    def rec(k, rem):
        if k == J:
            if rem == 0:
                if len(out) >= limit:
                    raise SizeLimitExceeded(f"more than {limit} perfect configurations")
                out.append(tuple(b))
            return
        s = sizes[k]
        for t in range(rem // s + 1):
            if reach[k + 1][rem - t * s]:
                b[k] = t
                rec(k + 1, rem - t * s)
        b[k] = 0

    if reach[0][B]:
        rec(0, B)
    return out


# -- cone membership -------------------------------------------------------------


def _phase_one(rows: list[list[Fraction]], rhs: list[Fraction]) -> bool:
    """Is {x >= 0 : A x = rhs} nonempty?  Dense tableau, Bland's rule, rhs >= 0."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    # tableau columns: n structurals, m artificials, then the right-hand side
    T = [row[:] + [Fraction(int(i == r)) for i in range(m)] + [rhs[r]] for r, row in enumerate(rows)]
    basis = [n + r for r in range(m)]
    # objective row: minimize the sum of artificials, written in reduced form
    obj = [Fraction(0)] * (n + m + 1)
    for r in range(m):
        for k in range(n):
            obj[k] -= T[r][k]
        obj[-1] -= T[r][-1]
    while True:
        q = next((k for k in range(n + m) if obj[k] < 0), -1)
        if q < 0:
            break
        leave, best = -1, None
        for r in range(m):
            if T[r][q] > 0:
                ratio = T[r][-1] / T[r][q]
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave < 0:  # pragma: no cover - phase one is bounded
            break
        pv = T[leave][q]
        T[leave] = [v / pv for v in T[leave]]
        for r in range(m):
            if r != leave and T[r][q]:
                f = T[r][q]
                T[r] = [a - f * b for a, b in zip(T[r], T[leave])]
        f = obj[q]
        obj = [a - f * b for a, b in zip(obj, T[leave])]
        basis[leave] = q
    return obj[-1] == 0


def cone_membership(p: Sequence, configs: Sequence[Sequence[int]]) -> bool:
    """Exact test of p = sum_i alpha_i b_i with alpha >= 0."""
    p = [Fraction(x) for x in p]
    if any(x < 0 for x in p):
        raise ValueError("p must be nonnegative")
    if not configs:
        return all(x == 0 for x in p)
    J = len(p)
    if any(len(b) != J for b in configs):
        raise ValueError("configuration length differs from p")
    rows = [[Fraction(b[j]) for b in configs] for j in range(J)]
    return _phase_one(rows, p)


def perfectly_packable(dist, limit: int = 1_000_000) -> bool:
    """Cone test for a distribution; past ``limit`` configurations, the waste LP decides."""
    try:
        configs = perfect_configs(dist.bin_size, dist.sizes, limit)
    except SizeLimitExceeded:
        warnings.warn("too many perfect configurations; falling back to the waste LP", RuntimeWarning)
        from .wastelp import waste_constant

        return waste_constant(dist) == 0
    return cone_membership(dist.probs, configs)
