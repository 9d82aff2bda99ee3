"""Exact revised simplex for ``min c.x  s.t.  A x = b, x >= 0``.

Arithmetic is rational throughout (gmpy2.mpq when available, else
fractions.Fraction).  Each iteration refactors the basis with a sparse exact LU.
Pivoting follows Bland's rule, so degenerate cycling cannot occur.

A floating-point solve (HiGHS) may supply a starting basis.  That basis is
only a hint: it is re-solved exactly, and primal and dual feasibility are
checked exactly, so the reported optimum never depends on floating point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Q = Fraction

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

ZERO = Q(0)


class SingularBasis(ArithmeticError):
    pass


class SparseLU:
    """Exact LU of a square matrix given by sparse columns {row: value}."""

    def __init__(self, cols: Sequence[dict], m: int):
        self.m = m
        rows: list[dict] = [dict() for _ in range(m)]
        colrows: list[set] = [set() for _ in range(m)]
        for k, col in enumerate(cols):
            for r, v in col.items():
                if v:
                    rows[r][k] = Q(v)
                    colrows[k].add(r)
        active_rows = set(range(m))
        active_cols = set(range(m))
        self.elims: list[tuple[int, int, object]] = []  # row_r -= mult * row_p
        self.piv: list[tuple[int, int]] = []  # (row, col) in pivot order
        self.urows: dict[int, dict] = {}
        for _ in range(m):
            # column with fewest active entries, then its sparsest row
            best_c, best_n = -1, m + 1
            for k in active_cols:
                n = len(colrows[k])
                if n < best_n:
                    best_c, best_n = k, n
                    if n <= 1:
                        break
            if best_n == 0 or best_c < 0:
                raise SingularBasis("basis matrix is singular")
            k = best_c
            p = min(colrows[k], key=lambda r: (len(rows[r]), r))
            prow = rows[p]
            pv = prow[k]
            for r in list(colrows[k]):
                if r == p:
                    continue
                row = rows[r]
                mult = row[k] / pv
                self.elims.append((r, p, mult))
                for kk, val in prow.items():
                    nv = row.get(kk, ZERO) - mult * val
                    if nv:
                        if kk not in row:
                            colrows[kk].add(r)
                        row[kk] = nv
                    elif kk in row:
                        del row[kk]
                        colrows[kk].discard(r)
            for kk in prow:
                colrows[kk].discard(p)
            active_rows.discard(p)
            active_cols.discard(k)
            self.piv.append((p, k))
            self.urows[p] = prow
        self.ucols: dict[int, list[tuple[int, object]]] = {k: [] for k in range(m)}
        for p, prow in self.urows.items():
            for kk, v in prow.items():
                self.ucols[kk].append((p, v))

    def solve(self, b: Sequence) -> list:
        """x with B x = b (x indexed by basis position)."""
        w = [Q(v) for v in b]
        for r, p, mult in self.elims:
            if w[p]:
                w[r] -= mult * w[p]
        x = [ZERO] * self.m
        for p, k in reversed(self.piv):
            prow = self.urows[p]
            acc = w[p]
            for kk, v in prow.items():
                if kk != k and x[kk]:
                    acc -= v * x[kk]
            x[k] = acc / prow[k]
        return x

    def solve_t(self, c: Sequence) -> list:
        """y with B^T y = c (y indexed by row)."""
        z = [ZERO] * self.m
        for p, k in self.piv:
            acc = Q(c[k])
            diag = None
            for r, v in self.ucols[k]:
                if r == p:
                    diag = v
                elif z[r]:
                    acc -= v * z[r]
            z[p] = acc / diag
        for r, p, mult in reversed(self.elims):
            if z[r]:
                z[p] -= mult * z[r]
        return z


@dataclass
class LpResult:
    status: str
    x: list = field(default_factory=list)  # values of the structural columns
    objective: object = None
    basis: list = field(default_factory=list)
    duals: list = field(default_factory=list)
    iterations: int = 0
    warm_started: bool = False


class ExactSimplex:
    """Standard-form LP with sparse integer/rational columns.

    ``cols[j]`` maps row index to coefficient.  ``b`` may have any sign; rows
    with negative right-hand side are negated internally.
    """

    def __init__(self, cols: Sequence[dict], b: Sequence, c: Sequence, m: int):
        self.m = m
        self.n = len(cols)
        sign = [(-1 if Q(v) < 0 else 1) for v in b]
        self.b = [Q(v) * sg for v, sg in zip(b, sign)]
        self.cols = [{r: Q(v) * sign[r] for r, v in col.items() if v} for col in cols]
        self.c = [Q(v) for v in c]
        # artificial column m+r is e_r; indices n..n+m-1
        self.iterations = 0

    def _col(self, j: int) -> dict:
        if j < self.n:
            return self.cols[j]
        return {j - self.n: Q(1)}

    def _factor(self, basis):
        return SparseLU([self._col(j) for j in basis], self.m)

    # -- main loop -------------------------------------------------------------

    def _run(self, basis: list, cost: list, allowed: int, max_iter: int):
        """Bland-rule primal simplex from a feasible basis.

        Columns >= ``allowed`` never enter.  Returns (status, basis, xB, y).
        """
        m = self.m
        while True:
            lu = self._factor(basis)
            xB = lu.solve(self.b)
            y = lu.solve_t([cost[j] for j in basis])
            inb = set(basis)
            q = -1
            for j in range(allowed):
                if j in inb:
                    continue
                d = cost[j]
                for r, v in self._col(j).items():
                    if y[r]:
                        d -= y[r] * v
                if d < 0:
                    q = j
                    break
            if q < 0:
                return OPTIMAL, basis, xB, y
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex iteration limit {max_iter} reached")
            self.iterations += 1
            a = [ZERO] * m
            for r, v in self._col(q).items():
                a[r] = v
            w = lu.solve(a)
            leave, best = -1, None
            for i in range(m):
                if w[i] > 0:
                    ratio = xB[i] / w[i]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        leave, best = i, ratio
            if leave < 0:
                return UNBOUNDED, basis, xB, y
            basis = basis[:leave] + [q] + basis[leave + 1 :]

    def _drive_out_artificials(self, basis: list) -> list:
        """Pivot zero-valued artificials out wherever a structural column can replace them."""
        m, n = self.m, self.n
        changed = True
        while changed:
            changed = False
            lu = self._factor(basis)
            inb = set(basis)
            for i, j in enumerate(basis):
                if j < n:
                    continue
                # row i of B^{-1}: solve B^T u = e_i
                e = [ZERO] * m
                e[i] = Q(1)
                u = lu.solve_t(e)
                for k in range(n):
                    if k in inb:
                        continue
                    t = ZERO
                    for r, v in self.cols[k].items():
                        if u[r]:
                            t += u[r] * v
                    if t:
                        basis = basis[:i] + [k] + basis[i + 1 :]
                        changed = True
                        break
                if changed:
                    break
        return basis

    def phase_one(self, max_iter: int) -> list | None:
        """Feasible basis from scratch, or None when infeasible."""
        m, n = self.m, self.n
        basis = []
        # unit columns already present serve as the initial basis where possible
        unit = {}
        for j, col in enumerate(self.cols):
            if len(col) == 1:
                (r, v), = col.items()
                if v == 1 and r not in unit:
                    unit[r] = j
        for r in range(m):
            basis.append(unit.get(r, n + r))
        cost = [ZERO] * n + [Q(1)] * m
        status, basis, xB, _ = self._run(basis, cost, n + m, max_iter)
        if status != OPTIMAL:  # pragma: no cover - phase one is bounded below by 0
            raise RuntimeError("phase one did not terminate optimally")
        if sum(v for v, j in zip(xB, basis) if j >= n) > 0:
            return None
        return self._drive_out_artificials(basis)

    def certify(self, basis: list) -> tuple[bool, bool]:
        """(primal feasible, dual feasible) for a candidate basis, exactly."""
        lu = self._factor(basis)
        xB = lu.solve(self.b)
        if any(v < 0 for v in xB):
            return False, False
        cost = self.c + [ZERO] * self.m
        y = lu.solve_t([cost[j] for j in basis])
        inb = set(basis)
        for j in range(self.n):
            if j in inb:
                continue
            d = self.c[j]
            for r, v in self.cols[j].items():
                if y[r]:
                    d -= y[r] * v
            if d < 0:
                return True, False
        return True, True

    def solve(self, hint: list | None = None, max_iter: int = 200000) -> LpResult:
        m, n = self.m, self.n
        basis = None
        warm = False
        if hint is not None:
            try:
                basis = list(hint)
                primal, _ = self.certify(basis)
                if primal:
                    basis = self._drive_out_artificials(basis)
                    warm = True
                else:
                    basis = None
            except SingularBasis:
                basis = None
            if basis is None:
                log.info("warm-start basis rejected; running phase one")
        if basis is None:
            basis = self.phase_one(max_iter)
            if basis is None:
                return LpResult(INFEASIBLE, iterations=self.iterations)
        cost = self.c + [ZERO] * m
        status, basis, xB, y = self._run(basis, cost, n, max_iter)
        if status == UNBOUNDED:
            return LpResult(UNBOUNDED, iterations=self.iterations, warm_started=warm)
        x = [ZERO] * n
        for j, v in zip(basis, xB):
            if j < n:
                x[j] = v
            elif v:  # pragma: no cover - artificials on redundant rows stay at 0
                raise RuntimeError("artificial variable left nonzero")
        obj = sum((self.c[j] * x[j] for j in range(n) if x[j]), ZERO)
        return LpResult(OPTIMAL, x, obj, basis, y, self.iterations, warm)


def highs_basis(cols: Sequence[dict], b: Sequence, c: Sequence, m: int, sense_max: bool = False):
    """Optimal basis from HiGHS as a column list (artificials for basic row logicals).

    Returns None when highspy is unavailable or HiGHS does not report an optimum.
    """
    try:
        import highspy
        import numpy as np
    except ImportError:  # pragma: no cover
        return None
    n = len(cols)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("presolve", "off")
    lp = highspy.HighsLp()
    lp.num_col_ = n
    lp.num_row_ = m
    lp.col_cost_ = np.asarray([float(v) for v in c], dtype=np.float64)
    lp.col_lower_ = np.zeros(n)
    lp.col_upper_ = np.full(n, highspy.kHighsInf)
    bb = np.asarray([float(v) for v in b], dtype=np.float64)
    lp.row_lower_ = bb
    lp.row_upper_ = bb
    starts, idx, vals = [0], [], []
    for col in cols:
        for r in sorted(col):
            idx.append(r)
            vals.append(float(col[r]))
        starts.append(len(idx))
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = np.asarray(starts, dtype=np.int32)
    lp.a_matrix_.index_ = np.asarray(idx, dtype=np.int32)
    lp.a_matrix_.value_ = np.asarray(vals, dtype=np.float64)
    if sense_max:
        lp.sense_ = highspy.ObjSense.kMaximize
    h.passModel(lp)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    basis = h.getBasis()
    basic = highspy.HighsBasisStatus.kBasic
    out = [j for j, st in enumerate(basis.col_status) if st == basic]
    out += [n + r for r, st in enumerate(basis.row_status) if st == basic]
    if len(out) != m:
        return None
    # order: the solver's row structure is irrelevant, positions just need to be a basis
    return out


def solve_exact(cols, b, c, m, warm_start: bool = True, max_iter: int = 200000) -> LpResult:
    """Minimize c.x over A x = b, x >= 0, exactly."""
    spx = ExactSimplex(cols, b, c, m)
    hint = None
    if warm_start:
        signed_cols = spx.cols
        hint = highs_basis(signed_cols, spx.b, spx.c, m)
    return spx.solve(hint, max_iter)


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(int(v.numerator), int(v.denominator))
