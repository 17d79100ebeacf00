"""
Exact rational linear programming by a two-phase tableau simplex.

Problem form::

    optimize  c . x
    s.t.      A_ub x <= b_ub
              A_eq x  = b_eq
              x_j >= 0 unless j is free

Inputs and outputs are `fractions.Fraction`; internally the tableau uses
gmpy2's mpq when available, which is much faster. Pivoting uses Dantzig's rule and
switches to Bland's rule after a run of degenerate pivots, so the method
terminates. Besides the primal point the solver returns row multipliers:
optimal duals, or a Farkas certificate when the problem is infeasible.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

ZERO = _Q(0)
ONE = _Q(1)

_DEGENERATE_SWITCH = 50


@dataclass(frozen=True)
class LPResult:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    # optimal: dual multipliers y (ub rows first, then eq rows) with
    #   objective = y . b  and  A^T y  matching c on basic columns.
    # infeasible: Farkas multipliers u with u >= 0 on ub rows,
    #   (u^T A)_j >= 0 for bounded j, == 0 for free j, and u . b < 0.
    multipliers: tuple[Fraction, ...] | None = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _q(v) -> "_Q":
    if isinstance(v, Fraction):
        return _Q(v.numerator, v.denominator)
    if isinstance(v, numbers.Integral):
        return _Q(int(v))
    if isinstance(v, numbers.Real) and not isinstance(v, type(ZERO)):
        return _Q(float(v))
    return _Q(v)


def _frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _q_rows(rows) -> list:
    return [[_q(v) for v in r] for r in rows]


def _frac_rows(rows) -> list[list[Fraction]]:
    return [[Fraction(v) for v in r] for r in rows]


class _Tableau:
    """Dense tableau; the last entry of every row is the right-hand side."""

    def __init__(self, rows: list[list[Fraction]], basis: list[int], ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r: int, j: int, cost: list[Fraction]) -> None:
        rows = self.rows
        prow = rows[r]
        pv = prow[j]
        if pv != ONE:
            inv = ONE / pv
            prow = [v * inv if v else v for v in prow]
            rows[r] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[j]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
        f = cost[j]
        if f:
            for k in nz:
                cost[k] -= f * prow[k]
        self.basis[r] = j
        self.pivots += 1

    def run(self, cost: list[Fraction], allowed: list[bool]) -> str:
        """Minimise with reduced-cost row `cost` (last entry = -objective)."""
        degenerate = 0
        rows = self.rows
        while True:
            bland = degenerate >= _DEGENERATE_SWITCH
            enter = -1
            best = ZERO
            for j in range(self.ncols):
                d = cost[j]
                if d < 0 and allowed[j]:
                    if bland:
                        enter = j
                        break
                    if d < best:
                        best, enter = d, j
            if enter < 0:
                return "optimal"
            leave = -1
            ratio = None
            for i, row in enumerate(rows):
                a = row[enter]
                if a > 0:
                    t = row[-1] / a
                    if (ratio is None or t < ratio
                            or (t == ratio and self.basis[i] < self.basis[leave])):
                        ratio, leave = t, i
            if leave < 0:
                return "unbounded"
            degenerate = degenerate + 1 if ratio == 0 else 0
            self.pivot(leave, enter, cost)


def linprog_exact(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
                  A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
                  free: Sequence[bool] | None = None, maximize: bool = False) -> LPResult:
    """Solve a small LP exactly. See the module docstring for the form."""
    c = [_q(v) for v in c]
    nvar = len(c)
    A_ub, A_eq = _q_rows(A_ub), _q_rows(A_eq)
    b_ub, b_eq = [_q(v) for v in b_ub], [_q(v) for v in b_eq]
    if len(A_ub) != len(b_ub) or len(A_eq) != len(b_eq):
        raise ValueError("row count mismatch between A and b")
    for r in A_ub + A_eq:
        if len(r) != nvar:
            raise ValueError("constraint row length differs from objective length")
    free = [False] * nvar if free is None else list(free)

    # structural columns: x_j (or x_j^+ , x_j^- for free j)
    col_of: list[tuple[int, int]] = []          # (var, sign)
    for j in range(nvar):
        col_of.append((j, 1))
        if free[j]:
            col_of.append((j, -1))
    nstruct = len(col_of)
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq
    nslack = m_ub
    ncols = nstruct + nslack + m               # + artificials
    art0 = nstruct + nslack

    rows: list[list[Fraction]] = []
    signs: list[int] = []
    for i, (a, b) in enumerate(list(zip(A_ub, b_ub)) + list(zip(A_eq, b_eq))):
        row = [ZERO] * (ncols + 1)
        for k, (j, s) in enumerate(col_of):
            if a[j]:
                row[k] = a[j] if s > 0 else -a[j]
        if i < m_ub:
            row[nstruct + i] = ONE
        row[-1] = b
        sg = 1
        if b < 0:
            sg = -1
            row = [-v for v in row]
        row[art0 + i] = ONE
        rows.append(row)
        signs.append(sg)

    tab = _Tableau(rows, [art0 + i for i in range(m)], ncols)

    # phase 1: minimise the sum of artificials
    cost = [ZERO] * (ncols + 1)
    for row in rows:
        for k in range(art0):
            if row[k]:
                cost[k] -= row[k]
        cost[-1] -= row[-1]
    allowed = [True] * ncols
    tab.run(cost, allowed)
    infeas = -cost[-1]
    if infeas > 0:
        # d_a = 1 - y_i on the artificial columns
        y = [ONE - cost[art0 + i] for i in range(m)]
        u = tuple(_frac(-signs[i] * y[i]) for i in range(m))
        return LPResult("infeasible", multipliers=u, pivots=tab.pivots)

    # drive zero-level artificials out of the basis where possible
    for r, bj in enumerate(tab.basis):
        if bj >= art0:
            row = tab.rows[r]
            for k in range(art0):
                if row[k]:
                    tab.pivot(r, k, cost)
                    break

    # phase 2
    sense = -1 if maximize else 1
    cstd = [ZERO] * (ncols + 1)
    for k, (j, s) in enumerate(col_of):
        cstd[k] = sense * s * c[j]
    cost = cstd[:]
    for r, bj in enumerate(tab.basis):
        cb = cstd[bj]
        if cb:
            row = tab.rows[r]
            for k, v in enumerate(row):
                if v:
                    cost[k] -= cb * v
    allowed = [k < art0 for k in range(ncols)]
    status = tab.run(cost, allowed)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)

    xstd = [ZERO] * ncols
    for r, bj in enumerate(tab.basis):
        xstd[bj] = tab.rows[r][-1]
    x = [ZERO] * nvar
    for k, (j, s) in enumerate(col_of):
        if xstd[k]:
            x[j] += s * xstd[k]
    obj = sum((c[j] * x[j] for j in range(nvar)), ZERO)
    # phase-2 artificial costs are 0, so d_a = -y_i (in the minimisation sense)
    y = tuple(_frac(sense * signs[i] * -cost[art0 + i]) for i in range(m))
    return LPResult("optimal", x=tuple(_frac(v) for v in x), objective=_frac(obj),
                    multipliers=y, pivots=tab.pivots)


def check_farkas(u: Sequence[Fraction], A_ub, b_ub, A_eq, b_eq, free=None) -> bool:
    """Verify an infeasibility certificate exactly."""
    A = _frac_rows(list(A_ub) + list(A_eq))
    b = [Fraction(v) for v in list(b_ub) + list(b_eq)]
    m_ub = len(A_ub)
    u = [Fraction(v) for v in u]
    if any(u[i] < 0 for i in range(m_ub)):
        return False
    nvar = len(A[0]) if A else 0
    free = [False] * nvar if free is None else free
    for j in range(nvar):
        s = sum((u[i] * A[i][j] for i in range(len(A))), Fraction(0))
        if free[j] and s != 0:
            return False
        if not free[j] and s < 0:
            return False
    return sum((u[i] * b[i] for i in range(len(b))), Fraction(0)) < 0
