"""Brute-force dimension-1 backend: dual graphs of curve models.

generate_intersection_data builds the degree matrix from the graph by the
fiber relation; refined levels synthesize data for dyadically subdivided
edges with the least-common-denominator multiplicity convention.  The gap
rule Q'(a,m) = mu * b_i * b_j / (dt * b'_a * b'_m) for adjacent subdivision
vertices is forced by requiring that functions affine on the base edges
satisfy the refined constraints with the same slacks as the coarse ones;
it reproduces genuine blow-up data at mediant points.

The per-level solver is exact policy iteration on the graph obstacle
problem (a monotone Laplacian complementarity system), a different algorithm
family from the simplex used by the main path; small instances are
cross-checked by brute-force vertex enumeration of the feasible polyhedron.
Non-stabilization past the depth cap yields an explicit inconclusive flag,
never a silently wrong value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .classes import ClosedForm, Curve, IntersectionData
from .complexes import DualComplex, Subdivision, edge_refinement, validate_complex
from .envelopes import EnvelopeProblem, PshConstraintSystem, SkeletalPA, envelope, psh_check
from .linalg import enumerate_polytope_vertices, solve


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class MetricGraphModel:
    """Dual graph of a curve model: weighted vertices, weighted edges."""

    vertices: tuple  # ((id, multiplicity, theta_mass), ...)
    edges: tuple  # ((i, j, multiplicity), ...), i != j

    def __post_init__(self):
        ids = [i for i, _b, _t in self.vertices]
        if not ids:
            raise OracleError("graph needs at least one vertex")
        if len(set(ids)) != len(ids):
            raise OracleError("duplicate vertex ids")
        for i, j, m in self.edges:
            if i == j:
                raise OracleError("self-loops are not allowed")
            if int(m) < 1:
                raise OracleError("edge multiplicity must be >= 1")
        if not self._connected():
            raise OracleError("graph must be connected")

    def _connected(self) -> bool:
        ids = [i for i, _b, _t in self.vertices]
        adj = {i: set() for i in ids}
        for i, j, _m in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        seen = {ids[0]}
        stack = [ids[0]]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(ids)

    def multiplicities(self) -> dict:
        return {i: int(b) for i, b, _t in self.vertices}

    def theta_masses(self) -> dict:
        return {i: Fraction(t) for i, _b, t in self.vertices}

    def merged_edges(self) -> dict:
        out = {}
        for i, j, m in self.edges:
            key = frozenset({i, j})
            out[key] = out.get(key, 0) + int(m)
        return out

    def to_complex(self, cid=None) -> DualComplex:
        faces = [[i] for i, _b, _t in self.vertices]
        faces += [sorted(k) for k in self.merged_edges()]
        return validate_complex(
            {
                "components": [(i, int(b)) for i, b, _t in self.vertices],
                "faces": faces,
            },
            cid=cid or "graph",
        )


def generate_intersection_data(g: MetricGraphModel) -> IntersectionData:
    """Degree matrix from the graph: off-diagonal = edge multiplicity,
    diagonal from the fiber relation; curves are the components."""
    b = g.multiplicities()
    ids = [i for i, _b, _t in g.vertices]
    merged = g.merged_edges()
    q = {}
    for key, m in merged.items():
        i, j = sorted(key)
        q[(i, j)] = Fraction(m)
    for i in ids:
        off = sum(
            Fraction(b[j]) * Fraction(merged.get(frozenset({i, j}), 0))
            for j in ids
            if j != i
        )
        q[(i, i)] = -off / Fraction(b[i])
    curves = tuple(
        Curve(
            i,
            {
                j: (
                    q.get((min(i, j), max(i, j)), Fraction(0))
                    if j != i
                    else q[(i, i)]
                )
                for j in ids
            },
        )
        for i in ids
    )
    data = IntersectionData(
        "graph", tuple((i, b[i]) for i in ids), curves, q
    )
    data.validate()
    return data


def graph_theta(g: MetricGraphModel) -> ClosedForm:
    masses = g.theta_masses()
    return ClosedForm("graph", dict(masses), dict(masses))


def graph_system(g: MetricGraphModel) -> PshConstraintSystem:
    return PshConstraintSystem(g.to_complex(), graph_theta(g), generate_intersection_data(g))


# -- refined levels ----------------------------------------------------------------


def _lcd(coords: dict) -> int:
    out = 1
    for v in coords.values():
        d = Fraction(v).denominator
        out = out * d // math.gcd(out, d)
    return out


@dataclass(frozen=True)
class RefinedLevel:
    """A synthesized determination for a graph refined at edge parameters."""

    base: MetricGraphModel
    subdivision: Subdivision  # of the base complex; vertices carry placements
    system: PshConstraintSystem
    chains: dict  # base edge frozenset -> ordered vid list along the edge

    def to_refined_coords(self, base_coords: dict) -> dict:
        """Base skeleton coordinates -> coordinates on the refined model."""
        base = self.base.to_complex()
        point = base.point(base_coords)
        supp = point.support()
        s = point.as_dict()
        b = self.base.multiplicities()
        bprime = self.system.data.multiplicities
        if len(supp) <= 1:
            vid = next(iter(supp)) if supp else None
            if vid is None:
                raise OracleError("empty point")
            return {vid: Fraction(1, bprime[vid])}
        i, j = sorted(supp)
        t = Fraction(b[j]) * s[j]
        chain = self.chains[frozenset({i, j})]
        params = [self._param(v, i, j) for v in chain]
        for r in range(len(chain) - 1):
            if params[r] <= t <= params[r + 1]:
                lam = (t - params[r]) / (params[r + 1] - params[r])
                a, c = chain[r], chain[r + 1]
                out = {}
                if lam != 1:
                    out[a] = (1 - lam) / Fraction(bprime[a])
                if lam != 0:
                    out[c] = lam / Fraction(bprime[c])
                return out
        raise OracleError("point outside the refined chain")

    def _param(self, vid, i, j) -> Fraction:
        coords = self.subdivision.vertices[vid]
        b = self.base.multiplicities()
        return Fraction(b[j]) * Fraction(coords.get(j, 0))

    def placement(self, vid) -> dict:
        return dict(self.subdivision.vertices[vid])


def refined_level(g: MetricGraphModel, cuts: dict) -> RefinedLevel:
    """Synthesize the model data for the graph with cut edges.

    `cuts` maps a base edge frozenset to parameters in (0,1) measured from
    the smaller vertex id.  New vertices get the least-common-denominator
    multiplicity and zero theta mass (a pulled-back class pairs trivially
    with exceptional components).
    """
    base_complex = g.to_complex()
    sub = edge_refinement(base_complex, cuts, sid="graph/level")
    b = g.multiplicities()
    theta_m = g.theta_masses()
    merged = g.merged_edges()

    comps = []
    theta_vals = {}
    for vid, coords in sub.vertices.items():
        if vid in b:
            comps.append((vid, b[vid]))
            theta_vals[vid] = theta_m[vid]
        else:
            comps.append((vid, _lcd(coords)))
            theta_vals[vid] = Fraction(0)
    bprime = dict(comps)

    chains = {}
    q = {}
    for key, mu in merged.items():
        i, j = sorted(key)
        params = sorted(set(Fraction(t) for t in cuts.get(key, ())))
        chain = [i] + [f"{i}|{j}@{t}" for t in params] + [j]
        chains[key] = chain
        tvals = [Fraction(0)] + params + [Fraction(1)]
        for r in range(len(chain) - 1):
            a, c = chain[r], chain[r + 1]
            dt = tvals[r + 1] - tvals[r]
            val = Fraction(mu) * b[i] * b[j] / (dt * bprime[a] * bprime[c])
            pair = (min(a, c), max(a, c))
            q[pair] = q.get(pair, Fraction(0)) + val

    ids = [i for i, _ in comps]

    def qat(x, y):
        if x == y:
            return q.get((x, x), Fraction(0))
        return q.get((min(x, y), max(x, y)), Fraction(0))

    for w in ids:
        off = sum(Fraction(bprime[u]) * qat(u, w) for u in ids if u != w)
        q[(w, w)] = -off / Fraction(bprime[w])

    curves = tuple(
        Curve(w, {u: qat(u, w) for u in ids}) for w in ids
    )
    data = IntersectionData("graph/level", tuple(comps), curves, q)
    data.validate()

    refined_complex = validate_complex(
        {
            "components": comps,
            "faces": [[v] for v in ids]
            + [
                [chain[r], chain[r + 1]]
                for chain in chains.values()
                for r in range(len(chain) - 1)
            ],
        },
        cid="graph/level",
    )
    theta = ClosedForm("graph/level", dict(theta_vals), dict(theta_vals))
    system = PshConstraintSystem(refined_complex, theta, data)
    return RefinedLevel(g, sub, system, chains)


# -- the graph obstacle problem ----------------------------------------------------


@dataclass
class LcpOutcome:
    phi: dict | None
    verified: bool
    note: str = ""


def _rows(theta, mmat, phi, ids):
    return {
        w: theta[w] + sum(mmat[w][u] * phi[u] for u in ids) for w in ids
    }


def solve_graph_obstacle(level: RefinedLevel, u_values: dict, max_rounds=None) -> LcpOutcome:
    """Greatest psh function below the obstacle, by exact policy iteration.

    Variables are the function values phi_w; TIGHT rows are solved as linear
    systems, CAP coordinates sit on the obstacle.  The result is verified
    independently: feasibility, complementarity, and no raisable set.
    """
    data = level.system.data
    theta = {
        w: Fraction(level.system.theta.curve_pairings.get(w, 0))
        for w in data.component_ids
    }
    ids = list(data.component_ids)
    bprime = data.multiplicities
    mmat = {
        w: {u: Fraction(bprime[u]) * data.q(u, w) for u in ids} for w in ids
    }
    u = {w: Fraction(u_values[w]) for w in ids}
    if max_rounds is None:
        max_rounds = 5 * len(ids) + 20

    if all(t == 0 for t in theta.values()):
        # only constants are 0-psh on a connected fiber: envelope = min(u)
        floor = min(u.values())
        return LcpOutcome({w: floor for w in ids}, True, "constant envelope")

    tight = frozenset()
    phi = dict(u)
    seen = set()
    for _ in range(max_rounds):
        if tight:
            rows_idx = sorted(tight)
            a = [
                [mmat[w][x] for x in rows_idx]
                for w in rows_idx
            ]
            rhs = [
                -theta[w]
                - sum(mmat[w][x] * u[x] for x in ids if x not in tight)
                for w in rows_idx
            ]
            sol = solve(a, rhs)
            if sol is None:
                return LcpOutcome(None, False, "singular tight system")
            phi = dict(u)
            for w, val in zip(rows_idx, sol):
                phi[w] = val
        else:
            phi = dict(u)
        rows = _rows(theta, mmat, phi, ids)
        new_tight = frozenset(
            {w for w in ids if rows[w] < 0}
            | {w for w in tight if phi[w] < u[w] and rows[w] == 0}
        )
        if new_tight == tight and all(rows[w] >= 0 for w in ids) and all(
            phi[w] <= u[w] for w in ids
        ):
            break
        if new_tight in seen and new_tight != tight:
            return LcpOutcome(None, False, "policy cycle")
        seen.add(new_tight)
        tight = new_tight
    else:
        return LcpOutcome(None, False, "round cap reached")

    # independent verification
    rows = _rows(theta, mmat, phi, ids)
    if any(phi[w] > u[w] for w in ids) or any(rows[w] < 0 for w in ids):
        return LcpOutcome(None, False, "infeasible fixed point")
    if any(phi[w] < u[w] and rows[w] != 0 for w in ids):
        return LcpOutcome(None, False, "complementarity failure")
    raisable = {w for w in ids if phi[w] < u[w]}
    while True:
        drop = {
            w
            for w in raisable
            if rows[w] == 0 and sum(mmat[w][x] for x in raisable) < 0
        }
        if not drop:
            break
        raisable -= drop
    if raisable:
        return LcpOutcome(None, False, "raisable set found: not maximal")
    divisor = {w: Fraction(bprime[w]) * phi[w] for w in ids}
    verdict = psh_check(divisor, level.system)
    if not verdict:
        return LcpOutcome(None, False, "psh re-check failed")
    return LcpOutcome(phi, True)


def _vertex_enumeration_envelope(level: RefinedLevel, u_values: dict):
    """Brute-force certificate: componentwise max over polyhedron vertices."""
    data = level.system.data
    ids = list(data.component_ids)
    bprime = data.multiplicities
    theta = level.system.theta
    rows, rhs = [], []
    for curve in data.curves:
        rows.append([-Fraction(curve.pairings.get(i, 0)) for i in ids])
        rhs.append(Fraction(theta.curve_pairings.get(curve.curve_id, 0)))
    for k, w in enumerate(ids):
        row = [Fraction(0)] * len(ids)
        row[k] = Fraction(1, bprime[w])
        rows.append(row)
        rhs.append(Fraction(u_values[w]))
    verts = enumerate_polytope_vertices(rows, rhs)
    if not verts:
        return None
    best = {
        w: max(v[k] / Fraction(bprime[w]) for v in verts)
        for k, w in enumerate(ids)
    }
    return best


@dataclass(frozen=True)
class OracleReport:
    values: tuple | None  # per query, None when inconclusive
    level_index: int
    stabilized: bool
    level: RefinedLevel | None
    per_level: tuple  # ((level_index, values), ...)
    note: str = ""


def _obstacle_breakpoints(g: MetricGraphModel, obstacle: SkeletalPA) -> dict:
    b = g.multiplicities()
    cuts = {}
    for vid, coords in obstacle.subdivision.vertices.items():
        supp = frozenset(i for i, v in coords.items() if Fraction(v) != 0)
        if len(supp) == 2:
            i, j = sorted(supp)
            t = Fraction(b[j]) * Fraction(coords[j])
            if 0 < t < 1:
                cuts.setdefault(frozenset(supp), set()).add(t)
    return cuts


def oracle_envelope(
    g: MetricGraphModel,
    obstacle: SkeletalPA,
    queries,
    depth_cap: int = 12,
    size_cap: int = 400,
    certify_base: bool = True,
) -> OracleReport:
    """Dyadic-refinement envelope with the policy-iteration solver.

    Iterates until two successive refinement levels agree exactly at every
    query; past the depth or size cap the report is flagged inconclusive
    rather than silently wrong.  At the base level, small instances are also
    certified against brute-force vertex enumeration.
    """
    queries = tuple(queries)
    base_cuts = _obstacle_breakpoints(g, obstacle)
    merged = g.merged_edges()

    prev_values = None
    history = []
    for level_idx in range(depth_cap + 1):
        cuts = {}
        for key in merged:
            pts = set(base_cuts.get(key, set()))
            step = Fraction(1, 2**level_idx)
            for k in range(1, 2**level_idx):
                pts.add(k * step)
            if pts:
                cuts[key] = sorted(pts)
        level = refined_level(g, cuts)
        ids = level.system.data.component_ids
        if len(ids) > size_cap:
            return OracleReport(
                None, level_idx, False, None, tuple(history), "size cap exceeded"
            )
        u_values = {
            w: obstacle.evaluate(level.placement(w)) for w in ids
        }
        outcome = solve_graph_obstacle(level, u_values)
        if not outcome.verified:
            if len(ids) <= 8:
                best = _vertex_enumeration_envelope(level, u_values)
                if best is None:
                    return OracleReport(
                        None, level_idx, False, None, tuple(history),
                        "infeasible system",
                    )
                outcome = LcpOutcome(best, True, "vertex enumeration fallback")
            else:
                return OracleReport(
                    None, level_idx, False, None, tuple(history), outcome.note
                )
        if certify_base and level_idx == 0 and len(ids) <= 5:
            best = _vertex_enumeration_envelope(level, u_values)
            if best is not None and best != outcome.phi:
                raise OracleError(
                    "policy iteration and vertex enumeration disagree at the base level"
                )

        values = []
        for qcoords in queries:
            refined = level.to_refined_coords(qcoords)
            bprime = level.system.data.multiplicities
            val = sum(
                Fraction(outcome.phi[w]) * Fraction(bprime[w]) * s
                for w, s in refined.items()
            )
            values.append(val)
        values = tuple(values)
        history.append((level_idx, values))
        if prev_values is not None and values == prev_values:
            return OracleReport(values, level_idx, True, level, tuple(history))
        prev_values = values
    return OracleReport(
        prev_values, depth_cap, False, None, tuple(history), "depth cap reached"
    )


def envelope_at_level(level: RefinedLevel, obstacle: SkeletalPA, queries):
    """The main simplex path run at a refined determination: same polyhedron."""
    from .complexes import trivial_subdivision

    ids = level.system.data.component_ids
    u_values = {w: obstacle.evaluate(level.placement(w)) for w in ids}
    refined_obstacle = SkeletalPA(
        trivial_subdivision(level.system.determination), u_values
    )
    refined_queries = tuple(level.to_refined_coords(q) for q in queries)
    return envelope(EnvelopeProblem(level.system, refined_obstacle, refined_queries))


@dataclass(frozen=True)
class DiffReport:
    matches: tuple  # query indices agreeing
    mismatches: tuple  # (index, main value, oracle value)
    unverified: tuple  # query indices the oracle could not certify

    def clean(self) -> bool:
        return not self.mismatches


def compare(main_result, oracle_report: OracleReport) -> DiffReport:
    """Exact equality at stabilized queries; any mismatch is release-blocking."""
    main_values = main_result.values()
    if oracle_report.values is None or not oracle_report.stabilized:
        return DiffReport((), (), tuple(range(len(main_values))))
    matches, mismatches = [], []
    for k, (a, b) in enumerate(zip(main_values, oracle_report.values)):
        if a == b:
            matches.append(k)
        else:
            mismatches.append((k, a, b))
    return DiffReport(tuple(matches), tuple(mismatches), ())
