"""Dense exact linear algebra over Fraction.

Matrices are lists of row lists.  Sizes here are tiny (a handful of
components or simplex vertices), so plain Gaussian elimination is the right
tool; no pivoting heuristics beyond "first nonzero" are needed for
exact arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

Vec = list
Mat = list


def _as_fr(rows):
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows):
    """Reduced row echelon form.  Returns (rref_rows, pivot_columns)."""
    m = _as_fr(rows)
    if not m:
        return [], []
    nrows, ncols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def det(rows) -> Fraction:
    m = _as_fr(rows)
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant needs a square matrix")
    sign = Fraction(1)
    d = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        d *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return sign * d


def solve(a_rows, b_col):
    """One solution of A x = b with free variables set to 0, or None."""
    if not a_rows:
        return [] if all(x == 0 for x in b_col) else None
    ncols = len(a_rows[0])
    aug = [list(row) + [b] for row, b in zip(a_rows, b_col)]
    red, pivots = rref(aug)
    for row in red:
        if all(x == 0 for x in row[:ncols]) and row[ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        if c == ncols:
            return None
        x[c] = red[r][ncols]
    return x


def nullspace(a_rows):
    """Basis of the kernel of A."""
    if not a_rows:
        return []
    ncols = len(a_rows[0])
    red, pivots = rref(a_rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(v)
    return basis


def solve_affine_family(a_rows, b0, b1):
    """Solve A x = b0 + t*b1 for all t at once.

    Returns one of:
      ("line", x0, x1)    solutions x(t) = x0 + t*x1 for every t,
      ("point", t, x)     consistent only at t (unique because A has full
                          column rank in our uses),
      ("empty", None, None).
    """
    ncols = len(a_rows[0]) if a_rows else 0
    aug = [list(row) + [p, q] for row, p, q in zip(a_rows, b0, b1)]
    red, pivots = rref(aug)
    const_col, t_col = ncols, ncols + 1
    forced_t = None
    for row in red:
        if all(x == 0 for x in row[:ncols]):
            r0, r1 = row[const_col], row[t_col]
            if r1 == 0:
                if r0 != 0:
                    return ("empty", None, None)
            else:
                t_star = -r0 / r1
                if forced_t is not None and forced_t != t_star:
                    return ("empty", None, None)
                forced_t = t_star
    if any(c >= ncols for c in pivots):
        # a pivot in the RHS columns means inconsistency already handled above
        pivots = [c for c in pivots if c < ncols]
    x0 = [Fraction(0)] * ncols
    x1 = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        if c >= ncols:
            continue
        x0[c] = red[r][const_col]
        x1[c] = red[r][t_col]
    if forced_t is None:
        return ("line", x0, x1)
    x = [p + forced_t * q for p, q in zip(x0, x1)]
    return ("point", forced_t, x)


def enumerate_polytope_vertices(a_rows, b_col, max_bases=200000):
    """All vertices of {x : A x <= b} by basis enumeration.

    Exact and deliberately naive; callers guard sizes.  Raises if the
    combination count exceeds max_bases.
    """
    if not a_rows:
        return []
    n = len(a_rows[0])
    m = len(a_rows)
    from math import comb

    if comb(m, n) > max_bases:
        raise ValueError("vertex enumeration too large")
    seen = set()
    verts = []
    for idx in combinations(range(m), n):
        sub = [a_rows[i] for i in idx]
        if rank(sub) < n:
            continue
        x = solve(sub, [b_col[i] for i in idx])
        if x is None:
            continue
        if all(sum(r * v for r, v in zip(a_rows[i], x)) <= b_col[i] for i in range(m)):
            key = tuple(x)
            if key not in seen:
                seen.add(key)
                verts.append(x)
    return verts
