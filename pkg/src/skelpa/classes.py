"""Numerical classes: nef checks, the Zariski kernel certificate, and the
explicit equicontinuity bounds.

Intersection data is user-supplied: test curves with component pairings, the
symmetric degree matrix Q_ij = E_i . E_j . A^{n-1}, and optional face tensors
for the Lipschitz pipeline.  Nefness is certified against the declared curve
list only; for curve models the components generate, for anything else the
caller asserts generation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import SimplexRegion, sandwich_constant
from .linalg import nullspace, rank


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Curve:
    curve_id: str
    pairings: dict  # component id -> integer-ish Fraction (C . E_i)


@dataclass(frozen=True)
class IntersectionData:
    model_id: str
    components: tuple  # ((id, multiplicity), ...)
    curves: tuple  # of Curve
    degree_matrix: dict  # (i, j) -> Fraction, symmetric
    face_component: dict = field(default_factory=dict)  # (face, j) -> Fraction
    face_fiber: dict = field(default_factory=dict)  # face -> Fraction (X0 . E_J . A^..)

    @property
    def component_ids(self):
        return tuple(i for i, _ in self.components)

    @property
    def multiplicities(self):
        return dict(self.components)

    def q(self, i, j) -> Fraction:
        return Fraction(self.degree_matrix.get((i, j), self.degree_matrix.get((j, i), 0)))

    def validate(self):
        ids = self.component_ids
        for (i, j), v in self.degree_matrix.items():
            if self.q(i, j) != self.q(j, i):
                raise DataError(f"degree matrix not symmetric at ({i},{j})")
            if i not in ids or j not in ids:
                raise DataError(f"degree matrix references unknown component ({i},{j})")
        b = self.multiplicities
        # fibration relation: (Qb)_i <= 0 with sum_i b_i (Qb)_i = 0, hence = 0
        qb = {i: sum(b[j] * self.q(i, j) for j in ids) for i in ids}
        if any(v > 0 for v in qb.values()):
            raise DataError("degree matrix violates Q b <= 0")
        if sum(b[i] * qb[i] for i in ids) != 0:
            raise DataError("degree matrix violates the fibration relation sum b (Qb) = 0")
        for c in self.curves:
            # vertical curves pair to zero with the special fiber
            tot = sum(Fraction(b[i]) * Fraction(c.pairings.get(i, 0)) for i in ids)
            if tot != 0:
                raise DataError(f"curve {c.curve_id} pairs nontrivially with the fiber: {tot}")
        return True

    def adjacency(self):
        ids = self.component_ids
        adj = {i: set() for i in ids}
        for i in ids:
            for j in ids:
                if i != j and self.q(i, j) > 0:
                    adj[i].add(j)
        return adj

    def is_connected(self) -> bool:
        ids = self.component_ids
        if not ids:
            return False
        seen = {ids[0]}
        queue = deque([ids[0]])
        adj = self.adjacency()
        while queue:
            i = queue.popleft()
            for j in adj[i]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return len(seen) == len(ids)


@dataclass(frozen=True)
class ClosedForm:
    """A (1,1)-class determined on the model, via its pairings."""

    model_id: str
    curve_pairings: dict  # curve id -> Fraction (theta . C)
    vertex_pairings: dict  # component id -> Fraction (theta . E_i . A^{n-1})
    face_pairings: dict = field(default_factory=dict)  # face -> Fraction

    def scaled(self, t) -> "ClosedForm":
        t = Fraction(t)
        return ClosedForm(
            self.model_id,
            {k: t * v for k, v in self.curve_pairings.items()},
            {k: t * v for k, v in self.vertex_pairings.items()},
            {k: t * v for k, v in self.face_pairings.items()},
        )

    def plus(self, other: "ClosedForm") -> "ClosedForm":
        def add(a, b):
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, Fraction(0)) + v
            return out

        return ClosedForm(
            self.model_id,
            add(self.curve_pairings, other.curve_pairings),
            add(self.vertex_pairings, other.vertex_pairings),
            add(self.face_pairings, other.face_pairings),
        )


@dataclass(frozen=True)
class NefVerdict:
    ok: bool
    witness_curve: str | None = None
    slack: Fraction | None = None

    def __bool__(self):
        return self.ok


def is_nef(divisor: dict, theta: ClosedForm, data: IntersectionData) -> NefVerdict:
    """theta . C + sum_i c_i (C . E_i) >= 0 for every declared curve.

    An empty curve list is refused: vacuous nefness is a data error.
    """
    if not data.curves:
        raise DataError("no curves declared; nefness would be vacuous")
    unknown = set(divisor) - set(data.component_ids)
    if unknown:
        raise DataError(f"divisor references unknown components {sorted(unknown)}")
    for curve in data.curves:
        total = Fraction(theta.curve_pairings.get(curve.curve_id, 0))
        for i, c in divisor.items():
            total += Fraction(c) * Fraction(curve.pairings.get(i, 0))
        if total < 0:
            return NefVerdict(False, curve.curve_id, total)
    return NefVerdict(True)


@dataclass(frozen=True)
class KernelVerdict:
    ok: bool
    reason: str | None = None
    warning: str | None = None

    def __bool__(self):
        return self.ok


def zariski_kernel_check(data: IntersectionData, b: dict) -> KernelVerdict:
    """Certify that the fiber spans the kernel of the degree pairing.

    Checks Q b = 0, rank(Q) = |I| - 1, off-diagonal nonnegativity and
    connectedness of the intersection graph.
    """
    ids = data.component_ids
    if not ids:
        return KernelVerdict(False, "no components")
    warning = None
    if not data.is_connected():
        warning = "intersection graph disconnected; the special fiber must be connected"
        if len(ids) > 1:
            return KernelVerdict(False, "disconnected intersection graph", warning)
    for i in ids:
        for j in ids:
            if i != j and data.q(i, j) < 0:
                return KernelVerdict(False, f"negative off-diagonal entry at ({i},{j})")
    qb = {
        i: sum(Fraction(b[j]) * data.q(i, j) for j in ids) for i in ids
    }
    if any(v != 0 for v in qb.values()):
        return KernelVerdict(False, "Q b != 0")
    q_rows = [[data.q(i, j) for j in ids] for i in ids]
    if rank(q_rows) != len(ids) - 1:
        return KernelVerdict(False, f"rank(Q) = {rank(q_rows)} != {len(ids) - 1}")
    return KernelVerdict(True, None, warning)


def kernel_is_fiber_span(data: IntersectionData, b: dict) -> bool:
    """Exact nullspace cross-check: ker Q = span(b)."""
    ids = data.component_ids
    q_rows = [[data.q(i, j) for j in ids] for i in ids]
    basis = nullspace(q_rows)
    if len(basis) != 1:
        return False
    v = basis[0]
    bvec = [Fraction(b[i]) for i in ids]
    k = next((x / y for x, y in zip(v, bvec) if y != 0 and x != 0), None)
    if k is None:
        return False
    return all(x == k * y for x, y in zip(v, bvec))


def _graph_distances(data: IntersectionData, source) -> dict:
    adj = data.adjacency()
    dist = {source: 0}
    queue = deque([source])
    while queue:
        i = queue.popleft()
        for j in sorted(adj[i]):  # smallest-id tie break
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def vertex_lower_bound(theta: ClosedForm, data: IntersectionData) -> dict:
    """Per-vertex lower bounds -B_i for sup-normalized nef-twisted divisors.

    Follows the chain induction: C = max |theta . E_i . A^{n-1}|,
    lambda = max(-b_i Q_ii), B_i = C~ * sum_{m=1..ecc(i)} lambda~^m along
    shortest paths.  On integer data (lambda >= 1, edge strength >= 1) the
    constants reduce exactly to the classical chain-induction formula; rational data pads
    them to stay sound.
    """
    ids = data.component_ids
    b = data.multiplicities
    if len(ids) < 2:
        return {i: Fraction(0) for i in ids}
    if not data.is_connected():
        raise DataError("intersection graph must be connected")
    big_c = max(abs(Fraction(theta.vertex_pairings.get(i, 0))) for i in ids)
    lam = max(-Fraction(b[i]) * data.q(i, i) for i in ids)
    if lam <= 0:
        raise DataError("degenerate degree matrix: max(-b_i Q_ii) <= 0")
    adj = data.adjacency()
    kappa = min(
        Fraction(b[j]) * data.q(i, j)
        for i in ids
        for j in adj[i]
    )
    pad = min(kappa, Fraction(1))
    c_eff = big_c / pad
    lam_eff = max(lam, Fraction(1)) / pad
    bounds = {}
    for i in ids:
        dist = _graph_distances(data, i)
        if len(dist) != len(ids):
            raise DataError("intersection graph must be connected")
        ecc = max(dist.values())
        bounds[i] = c_eff * sum(lam_eff**m for m in range(1, ecc + 1))
    return bounds


def face_region(data: IntersectionData, face) -> SimplexRegion:
    """The face's geometric realization in its own s-coordinate chart."""
    order = sorted(face)
    b = data.multiplicities
    verts = []
    for k, i in enumerate(order):
        v = [Fraction(0)] * len(order)
        v[k] = Fraction(1, b[i])
        verts.append(tuple(v))
    return SimplexRegion(tuple(verts))


def lipschitz_bound(
    theta: ClosedForm,
    data: IntersectionData,
    face,
    boundary_norm,
) -> Fraction:
    """Sound C^{0,1} bound on a face for sup-normalized nef-twisted divisors.

    Aggregates the face tensors into a lower bound -C_e on the boundary
    derivatives toward each vertex e, then converts through the effective
    sandwich constant of the face.  `boundary_norm` is the inductively known
    C^{0,1} bound on the face's boundary faces.
    """
    face = frozenset(face)
    ids = data.component_ids
    b = data.multiplicities
    n_bd = Fraction(boundary_norm)
    if n_bd < 0:
        raise DataError("boundary norm must be nonnegative")
    if len(face) < 2:
        raise DataError("lipschitz_bound needs a face of positive dimension")

    region = face_region(data, face)
    diam = region.diameter_inf()
    c_geom = sandwich_constant(region)

    def tensor(j_set, j):
        key = (frozenset(j_set), j)
        if key not in data.face_component:
            raise DataError(f"missing tensor E_J.E_j for J={sorted(j_set)}, j={j}")
        return Fraction(data.face_component[key])

    def fiber_tensor(j_set):
        key = frozenset(j_set)
        if key not in data.face_fiber:
            raise DataError(f"missing tensor X0.E_J for J={sorted(j_set)}")
        return Fraction(data.face_fiber[key])

    def theta_tensor(j_set):
        key = frozenset(j_set)
        if key not in theta.face_pairings:
            raise DataError(f"missing pairing theta.E_J for J={sorted(j_set)}")
        return Fraction(theta.face_pairings[key])

    worst = Fraction(0)
    for e in sorted(face):
        sigma = face - {e}
        if len(sigma) == 1:
            # p = 0: tensors are rows of the degree matrix and theta pairings
            (j0,) = sigma
            star = [j for j in ids if j != j0 and data.q(j0, j) > 0]
            if e not in star:
                raise DataError(f"face {sorted(face)} is not an edge of the graph")
            denom = Fraction(b[e]) * data.q(j0, e)
            num = abs(Fraction(theta.vertex_pairings.get(j0, 0)))
            num += n_bd * sum(
                Fraction(b[j]) * data.q(j0, j) for j in star if j != e
            )
            c_e = num / denom
        else:
            star = [
                j
                for j in ids
                if j not in sigma and tensor(sigma, j) > 0
            ]
            if e not in star:
                raise DataError(f"vertex {e} does not meet the stratum of {sorted(sigma)}")
            denom = Fraction(b[e]) * tensor(sigma, e)
            num = abs(theta_tensor(sigma))
            num += n_bd * abs(fiber_tensor(sigma))
            # derivatives along sigma are controlled by the boundary norm
            num += n_bd * diam * sum(Fraction(b[j]) * abs(tensor(sigma, j)) for j in sigma)
            num += n_bd * sum(
                Fraction(b[j]) * tensor(sigma, j) for j in star if j != e
            )
            c_e = num / denom
        worst = max(worst, c_e)

    # |D_v phi(e)| <= max(C_e, 2 * boundary sup); mid-style quantity:
    mid_bound = n_bd + max(worst, 2 * n_bd)
    return c_geom * mid_bound
