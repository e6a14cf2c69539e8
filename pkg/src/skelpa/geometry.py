"""Exact piecewise-affine convex geometry on simplices.

Points are dense tuples of Fractions in a local chart (for faces of a dual
complex the chart is the face's own s-coordinates, and the ambient norm is
the max-norm on those coordinates).  A Carrier is a simplicial decomposition
of one or more parent regions; PA functions are vertex values interpolated
affinely on each carrier cell, never region lists.

Everything here is pure and exact; objects are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .linalg import rank, solve, solve_affine_family
from .lp import OPTIMAL, solve_lp

Vector = tuple


class GeometryError(ValueError):
    pass


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vscale(t, a):
    return tuple(Fraction(t) * x for x in a)


def max_norm(a) -> Fraction:
    return max((abs(x) for x in a), default=Fraction(0))


def affinely_independent(points) -> bool:
    if not points:
        return False
    base = points[0]
    diffs = [list(vsub(p, base)) for p in points[1:]]
    return rank(diffs) == len(diffs)


def barycentric_or_none(vertices, point):
    """Coordinates of `point` in the affine span of `vertices`, or None.

    Coordinates may be negative; the caller decides whether containment
    (all >= 0) is required.
    """
    n = len(point)
    rows = [[v[c] for v in vertices] for c in range(n)]
    rows.append([Fraction(1)] * len(vertices))
    rhs = list(point) + [Fraction(1)]
    return solve(rows, rhs)


@dataclass(frozen=True)
class SimplexRegion:
    """A simplex given by affinely independent vertices in a rational chart."""

    vertices: tuple

    def __post_init__(self):
        if not self.vertices:
            raise GeometryError("empty simplex")
        if len({tuple(v) for v in self.vertices}) != len(self.vertices):
            raise GeometryError("repeated vertices")
        if not affinely_independent(self.vertices):
            raise GeometryError("vertices not affinely independent")

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def barycentric(self, point):
        lam = barycentric_or_none(self.vertices, point)
        if lam is None:
            raise GeometryError("point outside the affine span of the simplex")
        return lam

    def contains(self, point) -> bool:
        lam = barycentric_or_none(self.vertices, point)
        return lam is not None and all(x >= 0 for x in lam)

    def barycenter(self):
        k = Fraction(1, len(self.vertices))
        acc = self.vertices[0]
        for v in self.vertices[1:]:
            acc = vadd(acc, v)
        return vscale(k, acc)

    def diameter_inf(self) -> Fraction:
        return max(
            (max_norm(vsub(a, b)) for a, b in combinations(self.vertices, 2)),
            default=Fraction(0),
        )


@dataclass(frozen=True)
class Carrier:
    """Simplicial decomposition: vertex chart plus maximal cells.

    `parent_of` groups cells by the parent region they subdivide; convexity
    is only ever required within one group.
    """

    vertex_coords: dict
    cells: tuple
    parent_of: dict = field(default_factory=dict)

    def cell_vertices(self, cell):
        return [self.vertex_coords[v] for v in cell]

    def locate(self, point):
        """(cell, barycentric) for some cell containing the point."""
        for cell in self.cells:
            lam = barycentric_or_none(self.cell_vertices(cell), point)
            if lam is not None and all(x >= 0 for x in lam):
                return cell, lam
        raise GeometryError(f"point {point} not on the carrier")

    def groups(self):
        by_parent = {}
        for cell in self.cells:
            by_parent.setdefault(self.parent_of.get(cell), []).append(cell)
        return by_parent


def region_carrier(region: SimplexRegion) -> Carrier:
    coords = {i: v for i, v in enumerate(region.vertices)}
    cell = tuple(range(len(region.vertices)))
    return Carrier(coords, (cell,), {cell: "region"})


def interval_carrier(a, b, breakpoints=()) -> Carrier:
    """Carrier for the segment [a, b] in a 1-d chart, split at breakpoints."""
    pts = sorted({Fraction(a), Fraction(b), *map(Fraction, breakpoints)})
    if pts[0] != Fraction(a) or pts[-1] != Fraction(b):
        raise GeometryError("breakpoints outside the interval")
    coords = {i: (p,) for i, p in enumerate(pts)}
    cells = tuple((i, i + 1) for i in range(len(pts) - 1))
    return Carrier(coords, cells, {c: "region" for c in cells})


@dataclass(frozen=True)
class PAFunction:
    """Piecewise-affine function: vertex values on an explicit carrier."""

    carrier: Carrier
    values: dict

    def __post_init__(self):
        missing = set(self.carrier.vertex_coords) - set(self.values)
        if missing:
            raise GeometryError(f"values missing at carrier vertices {sorted(map(str, missing))}")

    def evaluate(self, point) -> Fraction:
        cell, lam = self.carrier.locate(point)
        return sum(l * self.values[v] for l, v in zip(lam, cell))

    def cell_affine_value(self, cell, point) -> Fraction:
        """Value at `point` of the affine extension of the cell's piece."""
        lam = barycentric_or_none(self.carrier.cell_vertices(cell), point)
        if lam is None:
            raise GeometryError("point outside the cell's affine span")
        return sum(l * self.values[v] for l, v in zip(lam, cell))


def eval_affine(functional: dict, point: dict, components=None) -> Fraction:
    """<functional, point> = sum_i c_i s_i in the sparse skeleton chart."""
    if components is not None:
        unknown = set(functional) - set(components)
        if unknown:
            raise GeometryError(f"unknown component ids {sorted(unknown)}")
        unknown = set(point) - set(components)
        if unknown:
            raise GeometryError(f"point uses unknown component ids {sorted(unknown)}")
    return sum(Fraction(c) * point.get(i, Fraction(0)) for i, c in functional.items())


def _wall_pairs(carrier: Carrier, cells):
    by_facet = {}
    for cell in cells:
        for drop in cell:
            facet = frozenset(cell) - {drop}
            by_facet.setdefault(facet, []).append((cell, drop))
    for facet, touching in by_facet.items():
        if len(touching) == 2:
            yield touching[0], touching[1]


def is_convex_on_faces(phi: PAFunction) -> bool:
    """Exact convexity of a PA function on each parent region.

    A continuous PA function on a convex region is convex iff it is convex
    across every interior wall; across a wall the test is that the far
    vertex of one cell lies on or above the affine extension of the other.
    """
    for cells in phi.carrier.groups().values():
        for (c1, _d1), (c2, d2) in _wall_pairs(phi.carrier, cells):
            far = phi.carrier.vertex_coords[d2]
            if phi.values[d2] < phi.cell_affine_value(c1, far):
                return False
    return True


def interpolation_dominates(phi: PAFunction, region: SimplexRegion, point) -> bool:
    """phi(x) <= affine interpolation of phi's values at the region's vertices."""
    lam = region.barycentric(point)
    interp = sum(
        l * phi.evaluate(v) for l, v in zip(lam, region.vertices)
    )
    return phi.evaluate(point) <= interp


def segment_cell_interval(cell_vertices, v, d):
    """{t : v + t*d in conv(cell_vertices)} as a closed interval or None."""
    n = len(v)
    rows = [[u[c] for u in cell_vertices] for c in range(n)]
    rows.append([Fraction(1)] * len(cell_vertices))
    b0 = list(v) + [Fraction(1)]
    b1 = list(d) + [Fraction(0)]
    kind, first, second = solve_affine_family(rows, b0, b1)
    if kind == "empty":
        return None
    if kind == "point":
        t_star, lam = first, second
        if all(x >= 0 for x in lam):
            return (t_star, t_star)
        return None
    lam0, lam1 = first, second
    lo, hi = None, None
    for a, b in zip(lam0, lam1):
        if b == 0:
            if a < 0:
                return None
        elif b > 0:
            bound = -a / b
            lo = bound if lo is None else max(lo, bound)
        else:
            bound = -a / b
            hi = bound if hi is None else min(hi, bound)
    if lo is not None and hi is not None and lo > hi:
        return None
    return (lo, hi)


def directional_derivative(phi: PAFunction, v, w) -> Fraction:
    """One-sided derivative d/dt at t=0+ of phi((1-t)v + t w).

    Reported in the t-parametrization.  Exact: the first linearity cell along
    the segment is found by intersecting the segment with each carrier cell.
    """
    v = tuple(map(Fraction, v))
    w = tuple(map(Fraction, w))
    if v == w:
        raise GeometryError("degenerate direction: v = w")
    d = vsub(w, v)
    for cell in phi.carrier.cells:
        interval = segment_cell_interval(phi.carrier.cell_vertices(cell), v, d)
        if interval is None:
            continue
        lo, hi = interval
        lo = Fraction(0) if lo is None else max(lo, Fraction(0))
        hi = Fraction(1) if hi is None else min(hi, Fraction(1))
        if lo <= 0 < hi:
            p = vadd(v, vscale(hi, d))
            return (phi.cell_affine_value(cell, p) - phi.cell_affine_value(cell, v)) / hi
    raise GeometryError("segment does not start inside the carrier")


def boundary_projection(region: SimplexRegion, e, v):
    """(t_e, p): the exit point p of the ray from vertex e through v.

    p = e + t_e (v - e) is the unique boundary point with v on [e, p]; it
    always lies in the facet opposite e.
    """
    e = tuple(map(Fraction, e))
    v = tuple(map(Fraction, v))
    if e not in [tuple(u) for u in region.vertices]:
        raise GeometryError("e must be an extremal vertex of the simplex")
    if v == e:
        raise GeometryError("v must differ from e")
    lam = region.barycentric(v)
    if any(x < 0 for x in lam):
        raise GeometryError("v outside the simplex")
    idx = [tuple(u) for u in region.vertices].index(e)
    lam_e = lam[idx]
    if lam_e == 1:
        raise GeometryError("v must differ from e")
    t_e = 1 / (1 - lam_e)
    p = vadd(e, vscale(t_e, vsub(v, e)))
    return t_e, p


# -- Lipschitz calculus -----------------------------------------------------


def _tangent_ball_vertices(region: SimplexRegion):
    """Vertices of {u in T : ||u||_inf <= 1} where T is the tangent space.

    Parametrized by alpha in R^d via u = sum alpha_k (t_k - t_0); returns the
    ambient vectors u at the polytope's vertices.
    """
    t = region.vertices
    d = region.dim
    n = len(t[0])
    basis = [vsub(t[k + 1], t[0]) for k in range(d)]
    rows, rhs = [], []
    for c in range(n):
        row = [basis[k][c] for k in range(d)]
        rows.append(row)
        rhs.append(Fraction(1))
        rows.append([-x for x in row])
        rhs.append(Fraction(1))
    from .linalg import enumerate_polytope_vertices

    alphas = enumerate_polytope_vertices(rows, rhs)
    verts = []
    for alpha in alphas:
        u = tuple(
            sum(alpha[k] * basis[k][c] for k in range(d)) for c in range(n)
        )
        verts.append(u)
    return verts


def _gauge_of_difference_hull(region: SimplexRegion, u) -> Fraction:
    """Minkowski gauge of conv{+/-(t_i - t_j)} at u, by exact LP."""
    gens = []
    for a, b in combinations(region.vertices, 2):
        gens.append(vsub(a, b))
        gens.append(vsub(b, a))
    n = len(u)
    m = len(gens)
    rows, rhs = [], []
    for c in range(n):
        rows.append([gens[k][c] for k in range(m)])
        rhs.append(u[c])
        rows.append([-gens[k][c] for k in range(m)])
        rhs.append(-u[c])
    for k in range(m):
        row = [Fraction(0)] * m
        row[k] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
    res = solve_lp([Fraction(-1)] * m, rows, rhs)
    if res.status != OPTIMAL:
        raise GeometryError("gauge LP failed; degenerate simplex?")
    return -res.value


def sandwich_constant(region: SimplexRegion) -> Fraction:
    """The effective constant C of the boundary-derivative sandwich.

    C = max(1, diam, 1 + 4/rho) with rho the largest radius of a tangent
    max-norm ball inside the vertex-difference hull; rho is computed by
    gauge LPs at the ball's vertices, which makes the compactness argument
    effective.
    """
    if region.dim == 0:
        return Fraction(1)
    ball = _tangent_ball_vertices(region)
    inv_rho = max(_gauge_of_difference_hull(region, u) for u in ball)
    return max(Fraction(1), region.diameter_inf(), 1 + 4 * inv_rho)


def _dual_norm_of_piece(phi, cell, region, ball_vertices) -> Fraction:
    t0 = region.vertices[0]
    base = phi.cell_affine_value(cell, t0)
    best = Fraction(0)
    for u in ball_vertices:
        # <grad, u> = L(t_0 + u) - L(t_0); t_0 + u stays in aff(region)
        val = phi.cell_affine_value(cell, vadd(t0, u)) - base
        best = max(best, abs(val))
    return best


def c0_norm(phi: PAFunction) -> Fraction:
    return max(abs(v) for v in phi.values.values())


def c0_boundary_norm(phi: PAFunction, region: SimplexRegion) -> Fraction:
    best = Fraction(0)
    for vid, coord in phi.carrier.vertex_coords.items():
        lam = region.barycentric(coord)
        if any(x == 0 for x in lam):
            best = max(best, abs(phi.values[vid]))
    return best


def lipschitz_constant(phi: PAFunction, region: SimplexRegion) -> Fraction:
    if region.dim == 0:
        return Fraction(0)
    ball = _tangent_ball_vertices(region)
    return max(
        _dual_norm_of_piece(phi, cell, region, ball) for cell in phi.carrier.cells
    )


def _facet_piece_polytopes(phi, region, e_idx):
    """Per-piece regions Q_k of the restriction of phi to the facet opposite e.

    Works in reduced barycentric coordinates of the facet (dimension <= 2 in
    practice).  Yields (piece_cell, vertices_of_Q_k, full_dim_flag).
    """
    t = region.vertices
    facet = [t[i] for i in range(len(t)) if i != e_idx]
    d_f = len(facet) - 1
    pieces = phi.carrier.cells

    def point_of(z):
        lam = list(z) + [1 - sum(z)]
        acc = vscale(lam[0], facet[0])
        for l, f in zip(lam[1:], facet[1:]):
            acc = vadd(acc, vscale(l, f))
        return acc

    if d_f == 0:
        p = facet[0]
        vals = [(cell, phi.cell_affine_value(cell, p)) for cell in pieces]
        top = max(v for _, v in vals)
        for cell, v in vals:
            if v == top:
                yield cell, [p], True
        return

    # inequality description in z in R^{d_f}
    base_rows, base_rhs = [], []
    for i in range(d_f):
        row = [Fraction(0)] * d_f
        row[i] = Fraction(-1)
        base_rows.append(row)
        base_rhs.append(Fraction(0))
    base_rows.append([Fraction(1)] * d_f)
    base_rhs.append(Fraction(1))

    # affine data of each piece restricted to the facet chart
    def piece_affine(cell):
        vals = [phi.cell_affine_value(cell, f) for f in facet]
        # L(z) = vals[-1] + sum z_i (vals[i] - vals[-1])
        const = vals[-1]
        lin = [vals[i] - vals[-1] for i in range(d_f)]
        return const, lin

    data = {cell: piece_affine(cell) for cell in pieces}
    from .linalg import enumerate_polytope_vertices

    for cell in pieces:
        ck, lk = data[cell]
        rows = [list(r) for r in base_rows]
        rhs = list(base_rhs)
        for other in pieces:
            if other == cell:
                continue
            co, lo = data[other]
            # require L_k >= L_o: (lo - lk) . z <= ck - co
            rows.append([lo[i] - lk[i] for i in range(d_f)])
            rhs.append(ck - co)
        verts = enumerate_polytope_vertices(rows, rhs)
        if not verts:
            continue
        full = rank([list(vsub(tuple(v), tuple(verts[0]))) for v in verts[1:]]) == d_f
        yield cell, [point_of(z) for z in verts], full


def boundary_derivative_sup(phi: PAFunction, region: SimplexRegion) -> Fraction:
    """sup over vertices e and interior v of |D_{pi_e(v)} phi(e)|, exactly.

    The projection pi_e(v) sweeps the facet opposite e; on each linearity
    piece of phi restricted to that facet the derivative toward e is affine,
    so the sup is a max over piece-polytope vertices.  Pieces that meet the
    facet in lower dimension can only push the (usc) derivative up, hence
    they join the positive side but not the negative one.
    """
    best = Fraction(0)
    for e_idx, e in enumerate(region.vertices):
        for cell, verts, full in _facet_piece_polytopes(phi, region, e_idx):
            for p in verts:
                s = phi.cell_affine_value(cell, e) - phi.cell_affine_value(cell, p)
                if s > best:
                    best = s
                if full and -s > best:
                    best = -s
    return best


def lipschitz_sandwich(phi: PAFunction, region: SimplexRegion):
    """(lhs, mid, rhs, C) with lhs <= mid <= rhs exactly.

    mid is the boundary norm plus the sup of projected boundary derivatives;
    lhs and rhs sandwich it against the C^{0,1} norm through the effective
    constant C = sandwich_constant(region).  Requires phi convex.
    """
    if region.dim == 0:
        raise GeometryError("sandwich needs a simplex of positive dimension")
    if not is_convex_on_faces(phi):
        raise GeometryError("sandwich requires a convex PA function")
    c = sandwich_constant(region)
    c01 = c0_norm(phi) + lipschitz_constant(phi, region)
    mid = c0_boundary_norm(phi, region) + boundary_derivative_sup(phi, region)
    return c01 / c, mid, c * c01, c
