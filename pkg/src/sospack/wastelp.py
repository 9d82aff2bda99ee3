"""The Waste LP, the interior LPs and the distribution classifier.

Variables v(j, h) are the rates at which items of size s_j go into bins of level
h.  With probabilities scaled to integers by their common denominator D:

* size rows:  sum_h v(j, h) = D p_j
* flux rows:  for 1 <= h < B,  out(h) - in(h) + delta_h = 0,  delta_h >= 0
  where out(h) = sum_j v(j, h) and in(h) = sum_j v(j, h - s_j)
* objective:  minimize sum_h (B - h) delta_h,  and c(F) is the optimum over D.

delta_h / D is the rate at which bins are left behind at level h.  The interior
program LP_i drops the slack (flux rows become equalities), adds x_i to size row
i and maximizes x_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import DiscreteDistribution
from .model import dead_end_levels
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_exact, to_fraction

INF = math.inf

LINEAR = "LinearWaste"
SQRT = "SqrtWaste"
BOUNDED = "BoundedWaste"


class NotPerfectlyPackable(ValueError):
    pass


class LpFailure(RuntimeError):
    pass


@dataclass
class WasteLp:
    dist: DiscreteDistribution
    D: int
    rhs: list[int]  # D * p_j
    var_keys: list[tuple[int, int]]  # (j, h) pairs that may be nonzero
    fixed_zero: list[tuple[int, int]]  # (j, h) with s_j > B - h

    @property
    def B(self) -> int:
        return self.dist.bin_size

    @property
    def J(self) -> int:
        return self.dist.J

    @property
    def n_vars(self) -> int:
        return self.J * self.B

    @property
    def n_flux_rows(self) -> int:
        return self.B - 1

    @property
    def n_rows(self) -> int:
        return self.J + self.B - 1

    def flux_row(self, h: int) -> int:
        return self.J + h - 1

    def objective_coefficient(self, j: int, h: int) -> int:
        """Coefficient of v(j, h) when the objective is written on the v's alone."""
        B, s = self.B, self.dist.sizes[j]
        out = 0
        if h + s < B:
            out += B - h - s
        if h >= 1:
            out -= B - h
        return out

    def v_column(self, j: int, h: int) -> dict:
        B, s = self.B, self.dist.sizes[j]
        col = {j: 1}
        if h >= 1:
            col[self.flux_row(h)] = 1
        if 1 <= h + s <= B - 1:
            col[self.flux_row(h + s)] = -1
        return col

    def standard_form(self):
        """Columns, right-hand side and costs: the v's, then one slack per level."""
        B = self.B
        cols = [self.v_column(j, h) for j, h in self.var_keys]
        cost = [0] * len(cols)
        for h in range(1, B):
            cols.append({self.flux_row(h): 1})
            cost.append(B - h)
        b = list(self.rhs) + [0] * (B - 1)
        return cols, b, cost


def build_waste_lp(F: DiscreteDistribution) -> WasteLp:
    B = F.bin_size
    D, rhs = F.integer_weights()
    keys, fixed = [], []
    for j, s in enumerate(F.sizes):
        for h in range(B):
            (keys if s <= B - h else fixed).append((j, h))
    return WasteLp(F, D, rhs, keys, fixed)


@dataclass
class LpSolution:
    lp: WasteLp
    values: dict  # (j, h) -> Fraction, unscaled rates
    objective: Fraction  # c(F)
    gaps: list  # gaps[h] = Delta_h for h = 0..B (0 at both ends)
    basis: list = field(default_factory=list)
    warm_started: bool = False

    @property
    def c(self) -> Fraction:
        return self.objective

    def value(self, j: int, h: int) -> Fraction:
        return self.values.get((j, h), Fraction(0))

    def residuals(self) -> list[Fraction]:
        """Size-row and flux-row residuals (all exactly 0 for a valid solution)."""
        lp = self.lp
        F = lp.dist
        B = lp.B
        out = []
        for j, p in enumerate(F.probs):
            out.append(sum((self.value(j, h) for h in range(B)), Fraction(0)) - p)
        for h in range(1, B):
            flow_out = sum((self.value(j, h) for j in range(lp.J)), Fraction(0))
            flow_in = sum(
                (self.value(j, h - s) for j, s in enumerate(F.sizes) if h - s >= 0), Fraction(0)
            )
            out.append(flow_in - flow_out - self.gaps[h])
        return out


def _check_solution(sol: LpSolution) -> None:
    lp = sol.lp
    if any(r != 0 for r in sol.residuals()):
        raise LpFailure("solution violates a constraint")
    if any(v < 0 for v in sol.values.values()) or any(g < 0 for g in sol.gaps):
        raise LpFailure("solution has a negative component")
    if any(sol.value(j, h) != 0 for j, h in lp.fixed_zero):
        raise LpFailure("a capacity-fixed variable is nonzero")
    B = lp.B
    if sum((B - h) * sol.gaps[h] for h in range(1, B)) != sol.objective:
        raise LpFailure("objective differs from the gap-weighted flux")


def solve_lp(lp: WasteLp, warm_start: bool = True) -> LpSolution:
    cols, b, cost = lp.standard_form()
    res = solve_exact(cols, b, cost, lp.n_rows, warm_start=warm_start)
    if res.status != OPTIMAL:  # pragma: no cover - the Waste LP is always feasible and bounded
        raise LpFailure(f"waste LP solve ended {res.status}")
    D = lp.D
    nv = len(lp.var_keys)
    values = {}
    for k, key in enumerate(lp.var_keys):
        v = res.x[k]
        if v:
            values[key] = to_fraction(v) / D
    gaps = [Fraction(0)] * (lp.B + 1)
    for h in range(1, lp.B):
        gaps[h] = to_fraction(res.x[nv + h - 1]) / D
    sol = LpSolution(lp, values, to_fraction(res.objective) / D, gaps, res.basis, res.warm_started)
    _check_solution(sol)
    return sol


def waste_constant(F: DiscreteDistribution, warm_start: bool = True) -> Fraction:
    """c(F)."""
    return solve_lp(build_waste_lp(F), warm_start).objective


# -- interior programs -----------------------------------------------------------


def interior_lp(lp: WasteLp, i: int):
    """Standard form of LP_i (as a minimization of -x_i); x_i is the last column."""
    cols = [lp.v_column(j, h) for j, h in lp.var_keys]
    cost = [0] * len(cols)
    cols.append({i: -1})
    cost.append(-1)
    b = list(lp.rhs) + [0] * (lp.B - 1)
    return cols, b, cost


def interior_value(lp: WasteLp, i: int, warm_start: bool = True):
    """c_i(F): exact Fraction, or INF when size i alone fills a bin."""
    B = lp.B
    s = lp.dist.sizes[i]
    if B % s == 0:
        # e_i is itself a perfect configuration, so x_i can grow without bound
        return INF
    cols, b, cost = interior_lp(lp, i)
    res = solve_exact(cols, b, cost, lp.n_rows, warm_start=warm_start)
    if res.status == INFEASIBLE:
        raise NotPerfectlyPackable("interior LP infeasible at x_i = 0")
    if res.status == UNBOUNDED:  # pragma: no cover - excluded by the divisibility test
        return INF
    return to_fraction(-res.objective) / lp.D


def interior_values(F: DiscreteDistribution, sol: LpSolution | None = None, warm_start: bool = True) -> list:
    """c_i(F) for every size in the support of F (in increasing size order)."""
    G = F.restricted_to_support()
    lp = build_waste_lp(G)
    if sol is None:
        sol = solve_lp(lp, warm_start)
    if sol.objective != 0:
        raise NotPerfectlyPackable(f"c(F) = {sol.objective} > 0")
    return [interior_value(lp, i, warm_start) for i in range(G.J)]


@dataclass(frozen=True)
class DistributionClass:
    kind: str  # LinearWaste | SqrtWaste | BoundedWaste
    c: Fraction
    c_i: tuple | None = None  # over the support, increasing size; None if not computed

    def __str__(self):
        return f"{self.kind}{{c={self.c}}}" if self.kind == LINEAR else self.kind


def classify(F: DiscreteDistribution, all_interior: bool = False, warm_start: bool = True) -> DistributionClass:
    """Linear iff c(F) > 0; otherwise bounded iff every c_i(F) > 0.

    Sizes with probability 0 are left out: they play no part in the stream.
    Without ``all_interior`` the interior values are tried from the largest size
    down and the search stops at the first zero.
    """
    G = F.restricted_to_support()
    lp = build_waste_lp(G)
    sol = solve_lp(lp, warm_start)
    if sol.objective > 0:
        return DistributionClass(LINEAR, sol.objective)
    vals: list = [None] * G.J
    kind = BOUNDED
    for i in reversed(range(G.J)):
        vals[i] = interior_value(lp, i, warm_start)
        if vals[i] == 0:
            kind = SQRT
            if not all_interior:
                break
    done = all(v is not None for v in vals)
    return DistributionClass(kind, sol.objective, tuple(vals) if done else None)


# -- derived quantities ----------------------------------------------------------


@dataclass(frozen=True)
class GapRates:
    B: int
    delta: tuple  # delta[h] for h = 0..B, zero at both ends
    T: Fraction

    def nonzero(self) -> dict[int, Fraction]:
        return {h: d for h, d in enumerate(self.delta) if d}


def gap_rates(sol: LpSolution) -> GapRates:
    return GapRates(sol.lp.B, tuple(sol.gaps), sum(sol.gaps, Fraction(0)))


def augmented(F: DiscreteDistribution, c: Fraction | None = None) -> DiscreteDistribution:
    """F+ : size-1 mass c(F) mixed in and renormalized."""
    if c is None:
        c = waste_constant(F)
    return F.aug(c)


def gap_distribution(g: GapRates) -> DiscreteDistribution:
    """Size B - h with probability Delta_h / T."""
    if g.T == 0:
        raise ValueError("no gaps: T = 0")
    weights = {g.B - h: d / g.T for h, d in g.nonzero().items()}
    return DiscreteDistribution.from_weights(g.B, weights)


def doublestar_stream(F: DiscreteDistribution, g: GapRates) -> DiscreteDistribution:
    """F'' = F/(1+T) + T/(1+T) G: the combined real-plus-imaginary distribution."""
    if g.T == 0:
        return F
    return F.mixture(gap_distribution(g), g.T / (1 + g.T))


# -- ideal packing template ------------------------------------------------------


@dataclass
class PackingTemplate:
    B: int
    N: int  # items per template copy
    instructions: list  # (level, size, count), levels ascending
    final_profile: dict  # level -> count of bins left partially filled
    bins: int
    gap_total: int

    @property
    def waste(self) -> Fraction:
        return Fraction(self.gap_total, self.B)

    def to_json(self) -> dict:
        return {
            "bin_size": self.B,
            "N": self.N,
            "instructions": [{"level": h, "size": s, "count": n} for h, s, n in self.instructions],
            "final_profile": {str(h): n for h, n in sorted(self.final_profile.items())},
            "bins": self.bins,
            "gap_total": self.gap_total,
        }


def ideal_packing_template(sol: LpSolution) -> PackingTemplate:
    """Scale the rates to integers and follow them level by level from 0 up."""
    lp = sol.lp
    B = lp.B
    sizes = lp.dist.sizes
    dens = [v.denominator for v in sol.values.values()] + [d.denominator for d in sol.gaps]
    N = math.lcm(1, *dens)
    count = [0] * (B + 1)
    instr = []
    bins = 0
    for h in range(B):
        for j, s in enumerate(sizes):
            n = int(sol.value(j, h) * N)
            if not n:
                continue
            if h == 0:
                bins += n
            else:
                if count[h] < n:  # pragma: no cover - guaranteed by the flux rows
                    raise LpFailure(f"template runs out of level-{h} bins")
                count[h] -= n
            count[h + s] += n
            instr.append((h, s, n))
    final = {h: count[h] for h in range(1, B) if count[h]}
    gap = sum((B - h) * n for h, n in final.items())
    if Fraction(gap, N) != sol.objective:  # pragma: no cover
        raise LpFailure("template gap disagrees with c(F)")
    return PackingTemplate(B, N, instr, final, bins, gap)


def classification_json(F: DiscreteDistribution, cls: DistributionClass) -> dict:
    def fmt(v):
        if v == INF:
            return "inf"
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"

    return {
        "c": fmt(cls.c),
        "class": cls.kind,
        "c_i": None if cls.c_i is None else [fmt(v) for v in cls.c_i],
        "dead_end_levels": sorted(dead_end_levels(F.bin_size, F.support)),
    }

