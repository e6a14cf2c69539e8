"""The psh calculus on a fixed determination: checks, maxima, envelopes.

The feasible set of a PshConstraintSystem is the rational polyhedron of
divisor coefficient vectors whose twisted class pairs nonnegatively with
every declared curve.  Envelopes are computed per query point by the exact
simplex solver; every optimizer is re-verified against the constraints
independently of the solver before it is returned.

Envelope values are certified lower bounds for the true envelope: refining
the determination (a user decision, or the dyadic loop driven by the graph
backend) can only increase them, and the refinement loop never claims the
asymptotic value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .classes import ClosedForm, DataError, IntersectionData, is_nef
from .complexes import (
    Cell,
    ComplexError,
    DualComplex,
    Subdivision,
    trivial_subdivision,
)
from .geometry import PAFunction, is_convex_on_faces
from .lp import INFEASIBLE, OPTIMAL, solve_lp
from .valuations import GradedSequence, graded_limit, log_abs_ideal


class InfeasibleSystem(ValueError):
    """theta admits no psh functions on this determination."""


@dataclass(frozen=True)
class PshConstraintSystem:
    determination: DualComplex
    theta: ClosedForm
    data: IntersectionData

    def component_ids(self):
        return self.determination.component_ids


@dataclass(frozen=True)
class SkeletalPA:
    """A PA function on a subdivision of the determination."""

    subdivision: Subdivision
    values: dict  # vid -> Fraction

    @staticmethod
    def constant(complex_: DualComplex, value) -> "SkeletalPA":
        sub = trivial_subdivision(complex_)
        return SkeletalPA(sub, {v: Fraction(value) for v in sub.vertices})

    def pa(self) -> PAFunction:
        return PAFunction(self.subdivision.carrier(), dict(self.values))

    def evaluate(self, coords: dict) -> Fraction:
        root = self.subdivision.root()
        return self.pa().evaluate(root.dense(coords))

    def shift(self, c) -> "SkeletalPA":
        c = Fraction(c)
        return SkeletalPA(self.subdivision, {v: x + c for v, x in self.values.items()})

    def constraint_rows(self):
        """(point coords, bound) per carrier vertex."""
        return [
            (self.subdivision.vertices[v], self.values[v], v)
            for v in sorted(self.subdivision.vertices, key=str)
        ]


def divisor_function(system: PshConstraintSystem, divisor: dict) -> "SkeletalPA":
    sub = trivial_subdivision(system.determination)
    values = {}
    for v, coords in sub.vertices.items():
        values[v] = sum(Fraction(divisor.get(i, 0)) * x for i, x in coords.items())
    return SkeletalPA(sub, values)


def psh_check(divisor: dict, system: PshConstraintSystem):
    """Nefness of theta + dd^c phi_c against the declared curves."""
    return is_nef(divisor, system.theta, system.data)


@dataclass(frozen=True)
class EnvelopeProblem:
    system: PshConstraintSystem
    obstacle: SkeletalPA
    queries: tuple  # of coords dicts


@dataclass(frozen=True)
class QueryResult:
    point: dict
    value: Fraction
    optimizer: dict
    active_curves: tuple
    active_obstacle: tuple


@dataclass(frozen=True)
class EnvelopeResult:
    results: tuple  # of QueryResult

    def values(self):
        return [r.value for r in self.results]


def _nef_rows(system: PshConstraintSystem):
    ids = system.component_ids()
    rows, rhs, labels = [], [], []
    for curve in system.data.curves:
        rows.append([-Fraction(curve.pairings.get(i, 0)) for i in ids])
        rhs.append(Fraction(system.theta.curve_pairings.get(curve.curve_id, 0)))
        labels.append(("curve", curve.curve_id))
    return rows, rhs, labels


def envelope(problem: EnvelopeProblem) -> EnvelopeResult:
    """Exact per-determination envelope: one LP per query point.

    maximize phi_c(x) over nef-twisted c with phi_c <= u at every carrier
    vertex of the obstacle.  Infeasibility is reported, not swallowed;
    unboundedness cannot happen because the obstacle caps every vertex.
    """
    system = problem.system
    ids = system.component_ids()
    if not system.data.curves:
        raise DataError("no curves declared; nefness would be vacuous")
    rows, rhs, labels = _nef_rows(system)
    obstacle_rows = problem.obstacle.constraint_rows()
    for coords, bound, vid in obstacle_rows:
        rows.append([Fraction(coords.get(i, 0)) for i in ids])
        rhs.append(Fraction(bound))
        labels.append(("obstacle", vid))

    results = []
    for point in problem.queries:
        objective = [Fraction(point.get(i, 0)) for i in ids]
        res = solve_lp(objective, rows, rhs)
        if res.status == INFEASIBLE:
            raise InfeasibleSystem(
                "no psh function exists on this determination for the given form"
            )
        if res.status != OPTIMAL:
            raise AssertionError("envelope LP unbounded despite obstacle caps")
        optimizer = {i: c for i, c in zip(ids, res.x) if c != 0}
        verdict = psh_check(optimizer, system)
        if not verdict:
            raise AssertionError("LP optimizer failed the independent nef re-check")
        for coords, bound, vid in obstacle_rows:
            got = sum(Fraction(optimizer.get(i, 0)) * Fraction(coords.get(i, 0)) for i in ids)
            if got > bound:
                raise AssertionError("LP optimizer violates the obstacle")
        active_curves = tuple(
            labels[k][1] for k in res.active_rows if labels[k][0] == "curve"
        )
        active_obstacle = tuple(
            labels[k][1] for k in res.active_rows if labels[k][0] == "obstacle"
        )
        results.append(
            QueryResult(dict(point), res.value, optimizer, active_curves, active_obstacle)
        )
    return EnvelopeResult(tuple(results))


# -- tie refinements and suprema -------------------------------------------------


def _pairing(divisor: dict, coords: dict) -> Fraction:
    return sum(Fraction(c) * Fraction(coords.get(i, 0)) for i, c in divisor.items())


def _clip_ring(ring, delta):
    """Split a convex polygon ring by the line delta = 0; exact crossings.

    Returns (nonneg side ring, nonpos side ring); either may be None when
    the polygon does not reach that side in dimension 2.
    """
    vals = [delta(p) for p in ring]
    if all(v >= 0 for v in vals):
        return ring, None
    if all(v <= 0 for v in vals):
        return None, ring
    pos, neg = [], []
    n = len(ring)
    for k in range(n):
        p, vp = ring[k], vals[k]
        q, vq = ring[(k + 1) % n], vals[(k + 1) % n]
        if vp >= 0:
            pos.append(p)
        if vp <= 0:
            neg.append(p)
        if (vp > 0 and vq < 0) or (vp < 0 and vq > 0):
            t = vp / (vp - vq)
            cross = tuple(a + t * (b - a) for a, b in zip(p, q))
            pos.append(cross)
            neg.append(cross)
    return tuple(pos), tuple(neg)


def tie_refinement(complex_: DualComplex, functionals, sid=None) -> Subdivision:
    """Subdivision of a complex at pairwise tie loci of affine functionals.

    Implemented for determinations of dimension <= 2 (edges split at tie
    parameters, triangles clipped by tie lines and fan-triangulated); this
    covers every instance the suite exercises.
    """
    deltas = []
    seen_lines = set()
    for a in range(len(functionals)):
        for b in range(a + 1, len(functionals)):
            d = dict(functionals[a])
            for i, c in functionals[b].items():
                d[i] = d.get(i, Fraction(0)) - Fraction(c)
            d = {i: v for i, v in d.items() if v != 0}
            if not d:
                continue
            # dedupe parallel copies of the same tie line (up to scale)
            lead = d[min(d, key=str)]
            key = frozenset((i, v / lead) for i, v in d.items())
            if key not in seen_lines:
                seen_lines.add(key)
                deltas.append(d)

    vertices = {i: complex_.vertex_coord(i) for i in complex_.component_ids}
    registry = {}

    def register(coords: dict):
        key = tuple(sorted((i, Fraction(v)) for i, v in coords.items() if Fraction(v) != 0))
        for vid, existing in vertices.items():
            if tuple(sorted((i, Fraction(v)) for i, v in existing.items() if Fraction(v) != 0)) == key:
                return vid
        vid = f"t{len(registry)}"
        registry[key] = vid
        vertices[vid] = dict(key)
        return vid

    cells = []
    for face in sorted(complex_.maximal_faces(), key=lambda f: tuple(sorted(f))):
        order = sorted(face)
        if len(order) == 1:
            cells.append(Cell.simplex(tuple(order)))
            continue
        if len(order) > 3:
            raise ComplexError("tie refinement implemented for dimension <= 2")
        ring = [complex_.vertex_coord(i) for i in order]

        def dense(c):
            return tuple(Fraction(c.get(i, 0)) for i in order)

        rings = [tuple(dense(c) for c in ring)]
        for d in deltas:

            def delta(p, d=d):
                return sum(
                    Fraction(d.get(i, 0)) * p[k] for k, i in enumerate(order)
                )

            new_rings = []
            for r in rings:
                posr, negr = _clip_ring(r, delta)
                for piece in (posr, negr):
                    if piece is None:
                        continue
                    distinct = []
                    for p in piece:
                        if p not in distinct:
                            distinct.append(p)
                    if len(distinct) >= len(order):
                        new_rings.append(tuple(distinct))
            rings = new_rings

        for r in rings:
            vids = [
                register({i: p[k] for k, i in enumerate(order) if p[k] != 0})
                for p in r
            ]
            if len(order) == 2:
                # a clipped segment: sort along the edge
                pts = sorted(zip(r, vids))
                for (p1, v1), (p2, v2) in zip(pts, pts[1:]):
                    cells.append(Cell.simplex((v1, v2)))
            else:
                for k in range(1, len(vids) - 1):
                    cells.append(Cell.simplex((vids[0], vids[k], vids[k + 1])))
    dedup = []
    for c in cells:
        if c not in dedup:
            dedup.append(c)
    return Subdivision(
        sid or f"{complex_.cid}/ties", complex_, vertices, tuple(dedup)
    )


def usc_sup_family(family, system: PshConstraintSystem) -> SkeletalPA:
    """Pointwise sup of finitely many psh divisor functions, on a tie carrier.

    Finite family of affine-per-face functions: the sup is exactly attained,
    with no regularization gap at skeleton points.
    """
    if not family:
        raise DataError("empty family")
    for divisor in family:
        verdict = psh_check(divisor, system)
        if not verdict:
            raise DataError(
                f"family member fails the psh check at curve {verdict.witness_curve}"
            )
    sub = tie_refinement(system.determination, list(family))
    values = {
        v: max(_pairing(d, coords) for d in family)
        for v, coords in sub.vertices.items()
    }
    return SkeletalPA(sub, values)


@dataclass(frozen=True)
class MaxCombineResult:
    function: SkeletalPA
    status: str  # "certified" | "necessary-conditions-only"


def max_combine(
    c1: dict,
    c2: dict,
    system: PshConstraintSystem,
    refinement_system: PshConstraintSystem | None = None,
    refinement_placements: dict | None = None,
) -> MaxCombineResult:
    """Pointwise max of two psh divisor functions on the tie-refined carrier.

    With refinement data (a system over a finer model plus the placements of
    its components on the base skeleton) the result is certified nef there;
    the induced divisor uses the least-common-denominator multiplicity
    convention.  Otherwise only the necessary conditions (convexity on
    faces, parent constraints) are checked.
    """
    for c in (c1, c2):
        verdict = psh_check(c, system)
        if not verdict:
            raise DataError(
                f"max_combine input fails the psh check at curve {verdict.witness_curve}"
            )
    out = usc_sup_family([c1, c2], system)
    if refinement_system is not None:
        b = refinement_system.data.multiplicities
        if refinement_placements is None:
            raise DataError("refinement certification needs component placements")
        divisor = {}
        for v in refinement_system.component_ids():
            coords = refinement_placements[v]
            value = max(_pairing(c1, coords), _pairing(c2, coords))
            divisor[v] = Fraction(b[v]) * value
        verdict = is_nef(divisor, refinement_system.theta, refinement_system.data)
        if verdict:
            return MaxCombineResult(out, "certified")
        raise DataError(
            f"max fails the nef check on the refinement at curve {verdict.witness_curve}"
        )
    if not is_convex_on_faces(out.pa()):
        raise AssertionError("pointwise max of psh functions is not convex on faces")
    return MaxCombineResult(out, "necessary-conditions-only")


# -- envelope axioms --------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple  # of (name, ok, detail)

    def ok(self) -> bool:
        return all(c[1] for c in self.checks)


def _common_carrier(u: SkeletalPA, v: SkeletalPA):
    if u.subdivision is not v.subdivision and set(u.subdivision.vertices) != set(
        v.subdivision.vertices
    ):
        raise DataError("axiom checks need obstacles on a common carrier")


def envelope_axioms(
    u: SkeletalPA,
    v: SkeletalPA,
    c,
    system: PshConstraintSystem,
    queries,
    second_system: PshConstraintSystem | None = None,
) -> AxiomReport:
    """Exact verification of the envelope axioms at the query points.

    Monotonicity, +c equivariance, 1-Lipschitz in sup norm, concavity in
    (theta, u) at t = 1/2, and idempotence.  Any violation is a solver bug,
    not a data property.
    """
    _common_carrier(u, v)
    c = Fraction(c)
    queries = tuple(queries)
    checks = []

    def solve(obstacle, sys_=system):
        return envelope(EnvelopeProblem(sys_, obstacle, queries)).values()

    pu = solve(u)
    pv = solve(v)

    u_le_v = all(u.values[k] <= v.values[k] for k in u.values)
    if u_le_v:
        mono = all(a <= b for a, b in zip(pu, pv))
        checks.append(("monotone", mono, f"P(u)={pu}, P(v)={pv}"))
    else:
        mx = SkeletalPA(
            u.subdivision, {k: max(u.values[k], v.values[k]) for k in u.values}
        )
        pmx = solve(mx)
        mono = all(a <= b for a, b in zip(pu, pmx))
        checks.append(("monotone", mono, "compared against max(u,v)"))

    pshift = solve(u.shift(c))
    shift_ok = all(b - a == c for a, b in zip(pu, pshift))
    checks.append(("shift-equivariance", shift_ok, f"c={c}"))

    gap = max(abs(u.values[k] - v.values[k]) for k in u.values)
    lip_ok = all(abs(a - b) <= gap for a, b in zip(pu, pv))
    checks.append(("sup-norm 1-Lipschitz", lip_ok, f"sup|u-v|={gap}"))

    sys2 = second_system or system
    mixed_theta = system.theta.scaled(Fraction(1, 2)).plus(
        sys2.theta.scaled(Fraction(1, 2))
    )
    mixed_system = PshConstraintSystem(system.determination, mixed_theta, system.data)
    mixed_u = SkeletalPA(
        u.subdivision,
        {
            k: Fraction(1, 2) * u.values[k] + Fraction(1, 2) * v.values[k]
            for k in u.values
        },
    )
    try:
        pv2 = solve(v, sys2)
        pmix = solve(mixed_u, mixed_system)
        conc = all(
            m >= Fraction(1, 2) * a + Fraction(1, 2) * b
            for m, a, b in zip(pmix, pu, pv2)
        )
        checks.append(("concavity", conc, "t = 1/2"))
    except InfeasibleSystem:
        checks.append(("concavity", True, "vacuous: a mixed system is infeasible"))

    # idempotence: feed P(u)'s values back as the obstacle
    pu_fun = envelope(
        EnvelopeProblem(
            system,
            u,
            tuple(u.subdivision.vertices[k] for k in sorted(u.subdivision.vertices, key=str)),
        )
    )
    pu_values = {
        k: r.value
        for k, r in zip(sorted(u.subdivision.vertices, key=str), pu_fun.results)
    }
    pp = solve(SkeletalPA(u.subdivision, pu_values))
    idem = pp == pu
    checks.append(("idempotence", idem, f"P(P(u))={pp}"))

    return AxiomReport(tuple(checks))


# -- graded-sequence regularization ------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    index: int
    values: tuple  # phi_m at the queries
    psh_status: str  # "certified" | "necessary-only"
    gap: Fraction


@dataclass(frozen=True)
class RegularizationTrace:
    rows: tuple
    envelope_values: tuple
    gaps_monotone: bool


def _phi_m_function(system, ideal, m):
    def phi(coords):
        return log_abs_ideal(ideal, coords) / m

    return phi


def regularization_trace(
    seq: GradedSequence,
    system: PshConstraintSystem,
    queries,
    obstacle: SkeletalPA | None = None,
) -> RegularizationTrace:
    """phi_m = log|a_m|/m against the determination envelope.

    Verifies superadditivity and divisibility monotonicity at every query,
    classifies each phi_m as certified psh (affine on faces, nef) or
    necessary-only (exact convexity spot checks), and reports the gap to
    P^det(obstacle), which must be nonincreasing along divisibility chains.
    """
    complex_ = system.determination
    if obstacle is None:
        obstacle = SkeletalPA.constant(complex_, 0)
    queries = tuple(queries)
    env = envelope(EnvelopeProblem(system, obstacle, queries)).values()

    # superadditivity and divisibility monotonicity certificates, per query
    for q in queries:
        graded_limit(seq, q)

    rows = []
    for m, ideal in seq.ideals:
        phi = _phi_m_function(system, ideal, m)
        values = tuple(phi(q) for q in queries)

        affine = True
        for face in complex_.maximal_faces():
            order = sorted(face)
            bary = {
                i: Fraction(1, len(order) * complex_.multiplicity(i)) for i in order
            }
            interp = sum(
                Fraction(1, len(order)) * phi(complex_.vertex_coord(i))
                for i in order
            )
            if phi(bary) != interp:
                affine = False
                break
        if affine:
            divisor = {
                i: Fraction(complex_.multiplicity(i)) * phi(complex_.vertex_coord(i))
                for i in complex_.component_ids
            }
            verdict = psh_check(divisor, system)
            if not verdict:
                raise DataError(
                    f"phi_{m} fails the psh check at curve {verdict.witness_curve}"
                )
            status = "certified"
        else:
            # necessary condition: exact midpoint convexity along face chords
            for face in complex_.maximal_faces():
                order = sorted(face)
                if len(order) < 2:
                    continue
                a = complex_.vertex_coord(order[0])
                b = complex_.vertex_coord(order[1])
                midpoint = {
                    i: Fraction(a.get(i, 0) + b.get(i, 0), 2) for i in set(a) | set(b)
                }
                if phi(midpoint) > (phi(a) + phi(b)) / 2:
                    raise DataError(f"phi_{m} is not convex on face {sorted(face)}")
            status = "necessary-only"

        gap = max(abs(v - e) for v, e in zip(values, env)) if queries else Fraction(0)
        rows.append(TraceRow(m, values, status, gap))

    gaps_ok = True
    by_index = {r.index: r for r in rows}
    for r in rows:
        for s in rows:
            if s.index > r.index and s.index % r.index == 0:
                if s.gap > r.gap:
                    gaps_ok = False
    return RegularizationTrace(tuple(rows), tuple(env), gaps_ok)
