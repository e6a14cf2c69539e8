"""Exact rational linear programming: two-phase simplex with Bland's rule.

Problems here are small (tens of rows and columns), so a dense tableau over
Fraction is both simple and fast enough.  The objective travels as an extra
tableau row, so reduced costs come out of the pivots instead of being
recomputed; Bland's rule (first improving index) makes cycling impossible,
which matters because degenerate bases are the rule rather than the
exception for the envelope polyhedra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass
class LPResult:
    status: str
    value: Fraction | None
    x: list | None
    active_rows: list | None  # indices of constraints tight at the optimum


def solve_lp(objective, a_rows, b_col, maximize=True):
    """max (or min) c.x subject to A x <= b, x free.

    Free variables are split as x = u - w with u, w >= 0 and a slack is added
    per row.  Returns an LPResult with an exact optimal vertex.
    """
    n = len(objective)
    m = len(a_rows)
    if any(len(r) != n for r in a_rows):
        raise ValueError("ragged constraint matrix")
    c = [Fraction(v) for v in objective]
    if not maximize:
        c = [-v for v in c]

    # columns: u_0..u_{n-1}, w_0..w_{n-1}, s_0..s_{m-1}, then artificials
    ncols = 2 * n + m
    rows = []
    rhs = []
    flipped = []
    for i in range(m):
        row = [_ZERO] * ncols
        for j in range(n):
            aij = Fraction(a_rows[i][j])
            row[j] = aij
            row[n + j] = -aij
        row[2 * n + i] = _ONE
        bi = Fraction(b_col[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            flipped.append(i)
        rows.append(row)
        rhs.append(bi)

    art_of_row = {}
    basis = []
    for i in range(m):
        if i in dict.fromkeys(flipped):
            art_of_row[i] = None
            basis.append(None)
        else:
            basis.append(2 * n + i)
    art_cols = []
    for i in flipped:
        col = ncols + len(art_cols)
        art_cols.append(col)
        basis[i] = col
    total = ncols + len(art_cols)
    for i in range(m):
        rows[i] = rows[i] + [_ZERO] * len(art_cols)
    for k, i in enumerate(flipped):
        rows[i][ncols + k] = _ONE

    def pivot(prow, pcol, zrow, zval):
        pv = rows[prow][pcol]
        if pv != 1:
            inv = 1 / pv
            rows[prow] = [v * inv for v in rows[prow]]
            rhs[prow] = rhs[prow] * inv
        prow_vec = rows[prow]
        pb = rhs[prow]
        for i in range(m):
            if i == prow:
                continue
            f = rows[i][pcol]
            if f:
                ri = rows[i]
                rows[i] = [a - f * b for a, b in zip(ri, prow_vec)]
                rhs[i] = rhs[i] - f * pb
        f = zrow[pcol]
        if f:
            for j in range(total):
                if prow_vec[j]:
                    zrow[j] = zrow[j] - f * prow_vec[j]
            zval = zval - f * pb
        basis[prow] = pcol
        return zrow, zval

    def run(zrow, zval, allowed):
        while True:
            entering = None
            for j in allowed:
                if zrow[j] < 0:
                    entering = j  # Bland: first improving index
                    break
            if entering is None:
                return OPTIMAL, zrow, zval
            leaving = None
            best = None
            for i in range(m):
                coeff = rows[i][entering]
                if coeff > 0:
                    ratio = rhs[i] / coeff
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and basis[i] < basis[leaving])
                    ):
                        best = ratio
                        leaving = i
            if leaving is None:
                return UNBOUNDED, zrow, zval
            zrow, zval = pivot(leaving, entering, zrow, zval)

    def zrow_for(cost):
        # reduced costs z_j - c_j for the current basis
        zrow = [-cost[j] for j in range(total)]
        zval = _ZERO
        for i in range(m):
            cb = cost[basis[i]]
            if cb:
                ri = rows[i]
                for j in range(total):
                    if ri[j]:
                        zrow[j] += cb * ri[j]
                zval += cb * rhs[i]
        return zrow, zval

    if art_cols:
        cost1 = [_ZERO] * total
        for col in art_cols:
            cost1[col] = Fraction(-1)
        zrow, zval = zrow_for(cost1)
        status, zrow, zval = run(zrow, zval, range(total))
        infeas = sum(rhs[i] for i in range(m) if basis[i] >= ncols)
        if infeas != 0:
            return LPResult(INFEASIBLE, None, None, None)
        for i in range(m):
            if basis[i] >= ncols:
                col = next((j for j in range(ncols) if rows[i][j] != 0), None)
                if col is not None:
                    zrow, zval = pivot(i, col, zrow, zval)

    cost2 = [_ZERO] * total
    for j in range(n):
        cost2[j] = c[j]
        cost2[n + j] = -c[j]
    zrow, zval = zrow_for(cost2)
    status, zrow, zval = run(zrow, zval, range(ncols))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, None)

    xs = {}
    for i in range(m):
        if basis[i] < ncols:
            xs[basis[i]] = rhs[i]
    x = [xs.get(j, _ZERO) - xs.get(n + j, _ZERO) for j in range(n)]
    value = sum(cj * xj for cj, xj in zip(c, x))
    if not maximize:
        value = -value
    active = [
        i
        for i in range(m)
        if sum(Fraction(a_rows[i][j]) * x[j] for j in range(n)) == Fraction(b_col[i])
    ]
    return LPResult(OPTIMAL, value, x, active)
