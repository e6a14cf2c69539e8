"""Dual complexes of SNC models, subdivisions and support functions.

A DualComplex stores components with multiplicities and a downward-closed
face set; its geometric realization lives on the slice sum(b_i s_i) = 1 of
the nonnegative orthant, vertex i sitting at s_i = 1/b_i.  Subdivisions keep
their vertex coordinates in the root component basis, so retraction to an
ancestor is re-tagging plus validation.

The subdivision engine implements the scaled-star construction with its
explicit support function, and simplicialization by repeated stellar
subdivision at barycenters of non-simplicial faces (minimal dimension
first), which provably leaves every simplicial cell, in particular the
scaled star, untouched.  Support functions are carried through every step
so the output is re-certified by is_strictly_convex_support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import Carrier, barycentric_or_none
from .linalg import det, solve


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class SkeletonPoint:
    """A quasimonomial point: sparse rational coordinates, sum b_i s_i = 1."""

    complex_id: str
    coords: tuple  # sorted ((component_id, Fraction), ...)

    def as_dict(self) -> dict:
        return dict(self.coords)

    def support(self) -> frozenset:
        return frozenset(i for i, v in self.coords if v != 0)


def _freeze_coords(coords: dict) -> tuple:
    return tuple(sorted((i, Fraction(v)) for i, v in coords.items() if Fraction(v) != 0))


# -- cells -------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    """A polyhedral cell: simplex, planar polygon, frustum or pyramid."""

    kind: str
    data: tuple

    @staticmethod
    def simplex(vids):
        return Cell("simplex", tuple(sorted(vids)))

    @staticmethod
    def polygon(ring):
        ring = tuple(ring)
        if len(ring) < 3:
            raise ComplexError("polygon needs at least 3 vertices")
        rotations = [ring[i:] + ring[:i] for i in range(len(ring))]
        rev = tuple(reversed(ring))
        rotations += [rev[i:] + rev[:i] for i in range(len(rev))]
        return Cell("polygon", min(rotations))

    @staticmethod
    def frustum(pairs):
        return Cell("frustum", tuple(sorted(pairs)))

    @staticmethod
    def pyramid(apex, ring):
        return Cell("pyramid", (apex, Cell.polygon(ring).data))

    def vids(self) -> tuple:
        if self.kind == "simplex":
            return self.data
        if self.kind == "polygon":
            return self.data
        if self.kind == "frustum":
            return tuple(b for b, _ in self.data) + tuple(t for _, t in self.data)
        if self.kind == "pyramid":
            return (self.data[0],) + self.data[1]
        raise ComplexError(f"unknown cell kind {self.kind}")

    def vset(self) -> frozenset:
        return frozenset(self.vids())

    def dim(self) -> int:
        if self.kind == "simplex":
            return len(self.data) - 1
        if self.kind in ("polygon",):
            return 2
        if self.kind == "frustum":
            return len(self.data)
        if self.kind == "pyramid":
            return 3
        raise ComplexError(f"unknown cell kind {self.kind}")

    def is_simplex(self) -> bool:
        return self.kind == "simplex"

    def facets(self):
        if self.kind == "simplex":
            if len(self.data) == 1:
                return ()
            return tuple(
                Cell.simplex(self.data[:i] + self.data[i + 1 :])
                for i in range(len(self.data))
            )
        if self.kind == "polygon":
            ring = self.data
            n = len(ring)
            return tuple(
                Cell.simplex((ring[i], ring[(i + 1) % n])) for i in range(n)
            )
        if self.kind == "frustum":
            pairs = self.data
            m = len(pairs)
            bottom = Cell.simplex(tuple(b for b, _ in pairs))
            top = Cell.simplex(tuple(t for _, t in pairs))
            sides = []
            for i in range(m):
                rest = pairs[:i] + pairs[i + 1 :]
                if len(rest) == 1:
                    sides.append(Cell.simplex((rest[0][0], rest[0][1])))
                elif len(rest) == 2:
                    (b1, t1), (b2, t2) = rest
                    sides.append(Cell.polygon((b1, b2, t2, t1)))
                else:
                    sides.append(Cell.frustum(rest))
            return (bottom, top, *sides)
        if self.kind == "pyramid":
            apex, ring = self.data
            base = Cell.polygon(ring)
            n = len(ring)
            tris = tuple(
                Cell.simplex((apex, ring[i], ring[(i + 1) % n])) for i in range(n)
            )
            return (base, *tris)
        raise ComplexError(f"unknown cell kind {self.kind}")

    def all_faces(self) -> set:
        out = {self}
        stack = [self]
        while stack:
            cell = stack.pop()
            for facet in cell.facets():
                if facet not in out:
                    out.add(facet)
                    stack.append(facet)
        for v in self.vids():
            out.add(Cell.simplex((v,)))
        return out

    def triangulate(self) -> list:
        """Vertex-id simplices tiling the cell (no new vertices)."""
        if self.kind == "simplex":
            return [self.data]
        if self.kind == "polygon":
            ring = self.data
            return [(ring[0], ring[i], ring[i + 1]) for i in range(1, len(ring) - 1)]
        if self.kind == "frustum":
            pairs = self.data
            m = len(pairs)
            bottoms = [b for b, _ in pairs]
            tops = [t for _, t in pairs]
            tris = []
            for i in range(m):
                tris.append(tuple(tops[: i + 1]) + tuple(bottoms[i:]))
            return tris
        if self.kind == "pyramid":
            apex, ring = self.data
            return [
                (apex, ring[0], ring[i], ring[i + 1]) for i in range(1, len(ring) - 1)
            ]
        raise ComplexError(f"unknown cell kind {self.kind}")


# -- the dual complex ---------------------------------------------------------


@dataclass(frozen=True)
class DualComplex:
    cid: str
    components: tuple  # ((id, multiplicity), ...) in declaration order
    faces: frozenset  # frozensets of component ids, downward closed

    @property
    def component_ids(self):
        return tuple(i for i, _ in self.components)

    def multiplicity(self, i) -> int:
        for j, b in self.components:
            if j == i:
                return b
        raise ComplexError(f"unknown component {i}")

    @property
    def multiplicities(self) -> dict:
        return dict(self.components)

    def maximal_faces(self):
        return [
            f
            for f in self.faces
            if f and not any(f < g for g in self.faces)
        ]

    def vertex_coord(self, i) -> dict:
        return {i: Fraction(1, self.multiplicity(i))}

    def fiber_functional(self) -> dict:
        """The divisor of the special fiber: coefficients b_i."""
        return {i: Fraction(b) for i, b in self.components}

    def point(self, coords: dict) -> SkeletonPoint:
        frozen = _freeze_coords(coords)
        supp = frozenset(i for i, _ in frozen)
        unknown = supp - set(self.component_ids)
        if unknown:
            raise ComplexError(f"unknown component ids {sorted(unknown)}")
        if any(v < 0 for _, v in frozen):
            raise ComplexError("negative coordinate")
        if supp not in self.faces:
            raise ComplexError(f"support {sorted(supp)} is not a face")
        total = sum(Fraction(self.multiplicity(i)) * v for i, v in frozen)
        if total != 1:
            raise ComplexError(f"normalization sum b_i s_i = {total} != 1")
        return SkeletonPoint(self.cid, frozen)

    def dense(self, coords: dict) -> tuple:
        return tuple(Fraction(coords.get(i, 0)) for i in self.component_ids)

    def carrier(self) -> Carrier:
        coords = {i: self.dense(self.vertex_coord(i)) for i in self.component_ids}
        cells = tuple(tuple(sorted(f)) for f in self.maximal_faces())
        return Carrier(coords, cells, {c: frozenset(c) for c in cells})


def validate_complex(raw, cid="model") -> DualComplex:
    """Build a DualComplex from (components, faces), certifying invariants.

    `raw` is a mapping with "components": [(id, b), ...] and "faces":
    iterable of id-collections.  The first violation is reported.
    """
    comps = list(raw["components"])
    seen = set()
    for i, b in comps:
        if i in seen:
            raise ComplexError(f"duplicate component id {i}")
        seen.add(i)
        if int(b) <= 0 or int(b) != b:
            raise ComplexError(f"multiplicity of {i} must be a positive integer")
    faces = {frozenset(f) for f in raw["faces"]}
    faces.add(frozenset())
    for f in faces:
        unknown = f - seen
        if unknown:
            raise ComplexError(f"face {sorted(f)} references unknown component {sorted(unknown)}")
    for i in seen:
        if frozenset([i]) not in faces:
            raise ComplexError(f"missing singleton face for component {i}")
    for f in faces:
        for i in f:
            if f - {i} not in faces:
                raise ComplexError(
                    f"face set not downward closed: {sorted(f)} present, {sorted(f - {i})} missing"
                )
    return DualComplex(cid, tuple((i, int(b)) for i, b in comps), frozenset(faces))


# -- subdivisions -------------------------------------------------------------


@dataclass(frozen=True)
class Subdivision:
    sid: str
    parent: object  # DualComplex or Subdivision
    vertices: dict  # vid -> sparse coords in root component basis
    cells: tuple  # maximal Cells

    def root(self) -> DualComplex:
        node = self.parent
        while isinstance(node, Subdivision):
            node = node.parent
        return node

    def ancestors(self):
        out = [self]
        node = self.parent
        while isinstance(node, Subdivision):
            out.append(node)
            node = node.parent
        out.append(node)
        return out

    def is_simplicial(self) -> bool:
        return all(c.is_simplex() for c in self.cells)

    def parent_face(self, cell: Cell) -> frozenset:
        supp = frozenset()
        for v in cell.vids():
            supp |= frozenset(
                i for i, val in self.vertices[v].items() if val != 0
            )
        if supp not in self.root().faces:
            raise ComplexError(f"cell {cell} does not sit inside a face")
        return supp

    def dense(self, coords: dict) -> tuple:
        return self.root().dense(coords)

    def point(self, coords: dict) -> SkeletonPoint:
        root = self.root()
        root.point(coords)  # validates positivity/normalization/support
        target = root.dense(coords)
        for cell in self.cells:
            for tri in cell.triangulate():
                lam = barycentric_or_none(
                    [self.dense(self.vertices[v]) for v in tri], target
                )
                if lam is not None and all(x >= 0 for x in lam):
                    return SkeletonPoint(self.sid, _freeze_coords(coords))
        raise ComplexError("point does not lie on the subdivision")

    def carrier(self) -> Carrier:
        if not self.is_simplicial():
            raise ComplexError("carrier requires a simplicial subdivision")
        coords = {v: self.dense(c) for v, c in self.vertices.items()}
        cells = tuple(c.data for c in self.cells)
        parent = {c.data: self.parent_face(c) for c in self.cells}
        return Carrier(coords, cells, parent)

    def volume_fraction(self, cell: Cell, face: frozenset) -> Fraction:
        """Volume of the cell as a fraction of the root face's volume."""
        root = self.root()
        order = sorted(face)
        bmult = root.multiplicities

        def bary(coords):
            return [Fraction(bmult[j]) * Fraction(coords.get(j, 0)) for j in order]

        total = Fraction(0)
        for tri in cell.triangulate():
            pts = [bary(self.vertices[v]) for v in tri]
            if len(pts) != len(order):
                raise ComplexError("cell dimension does not match face dimension")
            rows = [
                [pts[i][c] - pts[0][c] for c in range(len(order) - 1)]
                for i in range(1, len(pts))
            ]
            total += abs(det(rows)) if rows else Fraction(1)
        return total

    def tiling_certificate(self):
        """Check vertex containment and per-face volume sums; raise on failure."""
        root = self.root()
        for v, coords in self.vertices.items():
            root.point(coords)
        for face in root.maximal_faces():
            cells = [
                c
                for c in self.cells
                if self.parent_face(c) == face
            ]
            if not cells:
                raise ComplexError(f"face {sorted(face)} not covered by any cell")
            total = sum(self.volume_fraction(c, face) for c in cells)
            if total != 1:
                raise ComplexError(
                    f"cells assigned to face {sorted(face)} cover volume {total} != 1"
                )
        return True


def trivial_subdivision(complex_: DualComplex, sid=None) -> Subdivision:
    verts = {i: complex_.vertex_coord(i) for i in complex_.component_ids}
    cells = tuple(Cell.simplex(tuple(sorted(f))) for f in complex_.maximal_faces())
    return Subdivision(sid or f"{complex_.cid}/id", complex_, verts, cells)


def edge_refinement(complex_: DualComplex, cuts: dict, sid=None) -> Subdivision:
    """Subdivision of a 1-dimensional complex cutting edges at parameters.

    `cuts` maps an edge frozenset {i, j} to parameters t in (0,1), measured
    from the smaller component id toward the larger.  Only valid when every
    cut edge is a maximal face (always true for dual graphs of curve models).
    """
    vertices = {i: complex_.vertex_coord(i) for i in complex_.component_ids}
    cells = []
    for face in complex_.maximal_faces():
        if len(face) == 1:
            cells.append(Cell.simplex(tuple(face)))
            continue
        if len(face) != 2:
            raise ComplexError("edge_refinement requires a 1-dimensional complex")
        i, j = sorted(face)
        params = sorted(set(Fraction(t) for t in cuts.get(frozenset(face), ())))
        if any(not (0 < t < 1) for t in params):
            raise ComplexError("cut parameters must lie strictly inside the edge")
        ei, ej = complex_.vertex_coord(i), complex_.vertex_coord(j)
        chain_ids = [i]
        for t in params:
            vid = f"{i}|{j}@{t}"
            vertices[vid] = {
                i: (1 - t) * ei[i],
                j: t * ej[j],
            }
            chain_ids.append(vid)
        chain_ids.append(j)
        for a, b in zip(chain_ids, chain_ids[1:]):
            cells.append(Cell.simplex((a, b)))
    return Subdivision(sid or f"{complex_.cid}/edges", complex_, vertices, tuple(cells))


@dataclass(frozen=True)
class RetractionMap:
    source_id: str
    target_id: str


def retract(point: SkeletonPoint, source, target) -> SkeletonPoint:
    """Re-express a subdivision point on an ancestor complex.

    Coordinates are already in the root basis, so this is validation plus
    re-tagging; phi_D o retract = phi_D holds by construction.
    """
    chain = source.ancestors() if isinstance(source, Subdivision) else [source]
    ids = [getattr(n, "sid", None) or getattr(n, "cid") for n in chain]
    target_id = getattr(target, "sid", None) or getattr(target, "cid")
    if target_id not in ids:
        raise ComplexError(f"{target_id} is not an ancestor of {ids[0]}")
    coords = point.as_dict()
    if isinstance(target, Subdivision):
        return target.point(coords)
    return target.point(coords)


# -- support functions ---------------------------------------------------------


@dataclass(frozen=True)
class SupportFunction:
    """PA function on a subdivision with per-cell gradient divisors."""

    subdivision: Subdivision
    vertex_values: dict  # vid -> Fraction
    gradients: dict  # Cell -> divisor dict component -> Fraction

    def pair(self, divisor: dict, coords: dict) -> Fraction:
        return sum(Fraction(c) * Fraction(coords.get(i, 0)) for i, c in divisor.items())

    def value(self, coords: dict) -> Fraction:
        root = self.subdivision.root()
        root.point(coords)
        target = root.dense(coords)
        for cell in self.subdivision.cells:
            for tri in cell.triangulate():
                lam = barycentric_or_none(
                    [self.subdivision.dense(self.subdivision.vertices[v]) for v in tri],
                    target,
                )
                if lam is not None and all(x >= 0 for x in lam):
                    return self.pair(self.gradients[cell], coords)
        raise ComplexError("point not on the subdivision")

    def is_integral(self) -> bool:
        return all(
            Fraction(c).denominator == 1
            for g in self.gradients.values()
            for c in g.values()
        )

    def scaled(self, m) -> "SupportFunction":
        m = Fraction(m)
        return SupportFunction(
            self.subdivision,
            {v: m * x for v, x in self.vertex_values.items()},
            {c: {i: m * x for i, x in g.items()} for c, g in self.gradients.items()},
        )

    def check_consistency(self):
        for cell, grad in self.gradients.items():
            for v in cell.vids():
                got = self.pair(grad, self.subdivision.vertices[v])
                if got != self.vertex_values[v]:
                    raise ComplexError(
                        f"gradient of cell {cell} disagrees with value at {v}: {got} != {self.vertex_values[v]}"
                    )


def _integralize(support: SupportFunction) -> SupportFunction:
    denoms = [
        Fraction(c).denominator
        for g in support.gradients.values()
        for c in g.values()
    ]
    m = 1
    for d in denoms:
        m = m * d // math.gcd(m, d)
    return support.scaled(m)


def _adjacent_pairs(sub: Subdivision):
    """(cell1, cell2, wall vertex set) for walls interior to one root face."""
    root = sub.root()
    by_facet = {}
    for cell in sub.cells:
        for facet in cell.facets():
            by_facet.setdefault(facet.vset(), []).append(cell)
    for wall, touching in by_facet.items():
        if len(touching) != 2:
            continue
        c1, c2 = touching
        if c1 == c2:
            continue
        if sub.parent_face(c1) | sub.parent_face(c2) in root.faces:
            yield c1, c2, wall


def is_strictly_convex_support(h: SupportFunction, parent: DualComplex, sub: Subdivision) -> bool:
    """Convex on each parent face, and coarsest: adjacent gradients differ.

    Integer gradients are a type requirement; rational ones raise TypeError.
    """
    if sub.root().cid != parent.cid:
        raise ComplexError("subdivision does not refine the given complex")
    if not h.is_integral():
        raise TypeError("support function gradients must be integral divisors")
    h.check_consistency()
    for c1, c2, wall in _adjacent_pairs(sub):
        for near, far in ((c1, c2), (c2, c1)):
            gap_positive = False
            for v in far.vids():
                if v in wall:
                    continue
                delta = h.vertex_values[v] - h.pair(
                    h.gradients[near], sub.vertices[v]
                )
                if delta < 0:
                    return False  # not convex across the wall
                if delta > 0:
                    gap_positive = True
            if not gap_positive:
                return False  # affine across: subdivision not coarsest
    return True


# -- the scaled-star subdivision ------------------------------------------------


def star_subdivision(complex_: DualComplex, sigma, v_coords: dict, eps):
    """Scaled-star subdivision at a rational interior point of a face.

    Returns (subdivision, support_function): the complement of the star is
    unchanged, the star is scaled by eps toward v, side cells are frusta, and
    the returned support function is the integralized max of the coordinate
    cuts with the constant -(1-eps).
    """
    sigma = frozenset(sigma)
    eps = Fraction(eps)
    if not (0 < eps < 1):
        raise ComplexError("eps must be a rational in (0, 1)")
    if sigma not in complex_.faces or not sigma:
        raise ComplexError(f"{sorted(sigma)} is not a face")
    if len(sigma) < 2:
        raise ComplexError("degenerate input: a vertex face leaves nothing to subdivide")
    point = complex_.point(v_coords)
    if point.support() != sigma:
        raise ComplexError("v must be strictly interior to the face")
    v = point.as_dict()

    star_vertices = sorted(
        i for i in complex_.component_ids if sigma | {i} in complex_.faces
    )

    def scaled_id(j):
        return f"{j}^eps"

    vertices = {i: complex_.vertex_coord(i) for i in complex_.component_ids}
    for j in star_vertices:
        ej = complex_.vertex_coord(j)
        coords = {}
        for k in set(ej) | set(v):
            coords[k] = eps * Fraction(ej.get(k, 0)) + (1 - eps) * Fraction(v.get(k, 0))
        vertices[scaled_id(j)] = coords

    maximal = complex_.maximal_faces()
    cells = []
    gradients = {}
    fiber = complex_.fiber_functional()

    for f in maximal:
        if f | sigma not in complex_.faces:
            cell = Cell.simplex(tuple(sorted(f)))
            cells.append(cell)
            gradients[cell] = {}
        elif sigma <= f:
            cell = Cell.simplex(tuple(sorted(scaled_id(j) for j in f)))
            cells.append(cell)
            gradients[cell] = {i: -(1 - eps) * b for i, b in fiber.items()}

    # frusta P_K for maximal admissible K (K u sigma a face, sigma not <= K)
    admissible = [
        k
        for k in complex_.faces
        if k and not sigma <= k and (k | sigma) in complex_.faces
    ]
    for k in admissible:
        if any(k < k2 for k2 in admissible):
            continue
        pairs = tuple((j, scaled_id(j)) for j in sorted(k))
        cell = Cell.frustum(pairs) if len(pairs) > 1 else Cell.simplex(
            (pairs[0][0], pairs[0][1])
        )
        cells.append(cell)
        j_star = min(sigma - k)
        gradients[cell] = {j_star: Fraction(-1) / Fraction(v[j_star])}

    sub = Subdivision(f"{complex_.cid}/star", complex_, vertices, tuple(cells))

    values = {}
    for vid in vertices:
        values[vid] = Fraction(0) if vid in complex_.component_ids else -(1 - eps)
    support = _integralize(SupportFunction(sub, values, gradients))
    support.check_consistency()
    if not is_strictly_convex_support(support, complex_, sub):
        raise ComplexError("internal error: star support function not strictly convex")
    return sub, support


# -- simplicialization by stellar subdivision -----------------------------------


def _nonsimplicial_faces(sub: Subdivision):
    seen = {}
    for cell in sub.cells:
        for face in cell.all_faces():
            if not face.is_simplex():
                seen[face.vset()] = face
    return sorted(seen.values(), key=lambda f: (f.dim(), tuple(map(str, sorted(f.vids())))))


def _cone(apex, g: Cell) -> Cell:
    if g.kind == "simplex":
        return Cell.simplex((apex,) + g.data)
    if g.kind == "polygon":
        return Cell.pyramid(apex, g.data)
    if g.kind == "frustum" and len(g.data) == 2:
        (b1, t1), (b2, t2) = g.data
        return Cell.pyramid(apex, (b1, b2, t2, t1))
    raise ComplexError(f"cannot cone over a cell of kind {g.kind} and dim {g.dim()}")


def _stellar_once(sub: Subdivision, support: SupportFunction, face: Cell, step: int, enforce: bool = True):
    beta_id = f"b{step}"
    members = face.vids()
    coords = {}
    for v in members:
        for i, val in sub.vertices[v].items():
            coords[i] = coords.get(i, Fraction(0)) + Fraction(val)
    coords = {i: val / len(members) for i, val in coords.items() if val != 0}

    vertices = dict(sub.vertices)
    vertices[beta_id] = coords

    target = face.vset()
    new_cells = []
    h_grad = {}
    for cell in sub.cells:
        if target in {f.vset() for f in cell.all_faces()}:
            for g in cell.facets():
                if target <= g.vset():
                    continue
                cone = _cone(beta_id, g)
                new_cells.append(cone)
                h_grad[cone] = support.gradients[cell]
        else:
            new_cells.append(cell)
            h_grad[cell] = support.gradients[cell]

    new_sub = Subdivision(sub.sid, sub.parent, vertices, tuple(new_cells))

    h_values = dict(support.vertex_values)
    h_values[beta_id] = support.pair(
        support.gradients[next(c for c in sub.cells if target in {f.vset() for f in c.all_faces()})],
        coords,
    )

    # tent: 0 at every old vertex, -1 at the barycenter
    comp_ids = new_sub.root().component_ids
    tent_grad = {}
    for cell in new_cells:
        if beta_id not in cell.vids():
            tent_grad[cell] = {}
            continue
        rows, rhs = [], []
        for v in cell.vids():
            dense = new_sub.dense(vertices[v])
            rows.append(list(dense))
            rhs.append(Fraction(-1) if v == beta_id else Fraction(0))
        sol = solve(rows, rhs)
        if sol is None:
            raise ComplexError("internal error: tent gradient system inconsistent")
        tent_grad[cell] = {
            i: c for i, c in zip(comp_ids, sol) if c != 0
        }

    def pair(divisor, vid):
        return sum(
            Fraction(c) * Fraction(vertices[vid].get(i, 0)) for i, c in divisor.items()
        )

    n = Fraction(1)
    if enforce:
        for c1, c2, wall in _adjacent_pairs(new_sub):
            for near, far in ((c1, c2), (c2, c1)):
                for v in far.vids():
                    if v in wall:
                        continue
                    dh = pair(h_grad[far], v) - pair(h_grad[near], v)
                    dt = pair(tent_grad[far], v) - pair(tent_grad[near], v)
                    if dh < 0:
                        raise ComplexError("internal error: inherited support lost convexity")
                    if dh == 0:
                        if dt < 0:
                            raise ComplexError("internal error: tent concave across a flat wall")
                    elif dt < 0:
                        n = max(n, Fraction(math.floor(Fraction(-dt, dh))) + 1)

    values = {v: n * h_values[v] + (Fraction(-1) if v == beta_id else Fraction(0)) for v in vertices}
    gradients = {}
    for cell in new_cells:
        g = {}
        for i, c in h_grad[cell].items():
            g[i] = g.get(i, Fraction(0)) + n * Fraction(c)
        for i, c in tent_grad[cell].items():
            g[i] = g.get(i, Fraction(0)) + Fraction(c)
        gradients[cell] = {i: c for i, c in g.items() if c != 0}
    new_support = SupportFunction(new_sub, values, gradients)
    new_support.check_consistency()
    return new_sub, new_support


def barycentric_refine(sub: Subdivision, frozen=(), support: SupportFunction | None = None, max_depth=8):
    """Simplicialize by stellar subdivision at barycenters, min dimension first.

    Simplicial cells are never split, so any frozen (simplicial) faces appear
    verbatim.  When a support function is given it is transported through
    every step and re-integralized, and the result is certified strictly
    convex.  Raises past max_depth rounds.
    """
    for f in frozen:
        fset = frozenset(f)
        found = any(
            fset in {g.vset() for g in cell.all_faces() if g.is_simplex()}
            for cell in sub.cells
        )
        if not found:
            raise ComplexError(f"frozen face {sorted(map(str, fset))} is not a simplicial face")

    if support is None:
        support = SupportFunction(
            sub,
            {v: Fraction(0) for v in sub.vertices},
            {c: {} for c in sub.cells},
        )
        certify = False
    else:
        certify = True

    step = 0
    sweeps = 0
    current, hcur = sub, support
    while True:
        snapshot = _nonsimplicial_faces(current)
        if not snapshot:
            break
        sweeps += 1
        if sweeps > max_depth:
            raise ComplexError(f"refinement depth cap {max_depth} exceeded")
        for face in snapshot:
            still_there = any(
                face.vset() in {g.vset() for g in cell.all_faces()}
                for cell in current.cells
            )
            if not still_there:
                continue
            current, hcur = _stellar_once(current, hcur, face, step, enforce=certify)
            step += 1

    if certify:
        hcur = _integralize(hcur)
        if not is_strictly_convex_support(hcur, current.root(), current):
            raise ComplexError("internal error: refined support function not strictly convex")
        return current, hcur
    return current, None
