"""JSON serialization: model descriptions, obstacles, queries, results.

Schema version 1.  All numbers are exact "p/q" strings (or integers); floats
are rejected on load and never written.  Key order in emitted JSON is sorted
so identical jobs produce byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .classes import ClosedForm, Curve, IntersectionData
from .complexes import DualComplex, edge_refinement, trivial_subdivision, validate_complex
from .envelopes import SkeletalPA
from .oracle import MetricGraphModel
from .rationals import format_rational, parse_rational

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


def _rat(value, path):
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _pair_key(key: str):
    parts = key.split(",")
    if len(parts) != 2:
        raise SchemaError(f"matrix key {key!r} is not 'i,j'")
    return parts[0], parts[1]


@dataclass(frozen=True)
class ModelDescription:
    complex: DualComplex
    data: IntersectionData | None
    theta: ClosedForm | None
    graph: MetricGraphModel | None


def load_model(path) -> ModelDescription:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: malformed JSON: {exc}") from exc
    return model_from_dict(raw)


def model_from_dict(raw: dict) -> ModelDescription:
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"/schema_version: expected {SCHEMA_VERSION}, got {raw.get('schema_version')}"
        )
    kind = raw.get("kind", "model")
    if kind == "graph":
        verts = []
        for k, v in enumerate(raw.get("vertices", [])):
            if int(v.get("b", 0)) <= 0:
                raise SchemaError(f"/vertices/{k}/b: multiplicity must be positive")
            verts.append((v["id"], int(v["b"]), _rat(v.get("theta", 0), f"/vertices/{k}/theta")))
        edges = []
        for k, e in enumerate(raw.get("edges", [])):
            if len(e) == 2:
                edges.append((e[0], e[1], 1))
            else:
                edges.append((e[0], e[1], int(e[2])))
        graph = MetricGraphModel(tuple(verts), tuple(edges))
        from .oracle import generate_intersection_data, graph_theta

        return ModelDescription(
            graph.to_complex(), generate_intersection_data(graph), graph_theta(graph), graph
        )

    comps = []
    for k, c in enumerate(raw.get("components", [])):
        b = c.get("b", 0)
        if not isinstance(b, int) or b <= 0:
            raise SchemaError(f"/components/{k}/b: multiplicity must be a positive integer")
        comps.append((c["id"], b))
    try:
        complex_ = validate_complex(
            {"components": comps, "faces": raw.get("faces", [])},
            cid=raw.get("id", "model"),
        )
    except ValueError as exc:
        raise SchemaError(f"/faces: {exc}") from exc

    data = None
    if "degree_matrix" in raw or "curves" in raw:
        q = {}
        for key, val in raw.get("degree_matrix", {}).items():
            i, j = _pair_key(key)
            q[(i, j)] = _rat(val, f"/degree_matrix/{key}")
        curves = tuple(
            Curve(
                c["id"],
                {i: _rat(v, f"/curves/{k}/pairings/{i}") for i, v in c.get("pairings", {}).items()},
            )
            for k, c in enumerate(raw.get("curves", []))
        )
        face_component = {}
        face_fiber = {}
        tensors = raw.get("face_tensors", {})
        for k, rec in enumerate(tensors.get("component", [])):
            face_component[(frozenset(rec["face"]), rec["j"])] = _rat(
                rec["value"], f"/face_tensors/component/{k}/value"
            )
        for k, rec in enumerate(tensors.get("fiber", [])):
            face_fiber[frozenset(rec["face"])] = _rat(
                rec["value"], f"/face_tensors/fiber/{k}/value"
            )
        data = IntersectionData(
            complex_.cid, tuple(comps), curves, q, face_component, face_fiber
        )
        try:
            data.validate()
        except ValueError as exc:
            raise SchemaError(f"/degree_matrix: {exc}") from exc

    theta = None
    if "theta" in raw:
        t = raw["theta"]
        theta = ClosedForm(
            complex_.cid,
            {k: _rat(v, f"/theta/curve_pairings/{k}") for k, v in t.get("curve_pairings", {}).items()},
            {k: _rat(v, f"/theta/vertex_pairings/{k}") for k, v in t.get("vertex_pairings", {}).items()},
            {
                frozenset(key.split(",")): _rat(v, f"/theta/face_pairings/{key}")
                for key, v in t.get("face_pairings", {}).items()
            },
        )
    return ModelDescription(complex_, data, theta, None)


def model_to_dict(desc: ModelDescription) -> dict:
    if desc.graph is not None:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "graph",
            "vertices": [
                {"id": i, "b": b, "theta": format_rational(t)}
                for i, b, t in desc.graph.vertices
            ],
            "edges": [[i, j, m] for i, j, m in desc.graph.edges],
        }
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "model",
        "id": desc.complex.cid,
        "components": [{"id": i, "b": b} for i, b in desc.complex.components],
        "faces": sorted(sorted(f) for f in desc.complex.faces if f),
    }
    if desc.data is not None:
        out["degree_matrix"] = {
            f"{i},{j}": format_rational(v) for (i, j), v in sorted(desc.data.degree_matrix.items())
        }
        out["curves"] = [
            {
                "id": c.curve_id,
                "pairings": {i: format_rational(v) for i, v in sorted(c.pairings.items())},
            }
            for c in desc.data.curves
        ]
        tensors = {}
        if desc.data.face_component:
            tensors["component"] = [
                {"face": sorted(f), "j": j, "value": format_rational(v)}
                for (f, j), v in sorted(
                    desc.data.face_component.items(), key=lambda kv: (sorted(kv[0][0]), kv[0][1])
                )
            ]
        if desc.data.face_fiber:
            tensors["fiber"] = [
                {"face": sorted(f), "value": format_rational(v)}
                for f, v in sorted(desc.data.face_fiber.items(), key=lambda kv: sorted(kv[0]))
            ]
        if tensors:
            out["face_tensors"] = tensors
    if desc.theta is not None:
        out["theta"] = {
            "curve_pairings": {
                k: format_rational(v) for k, v in sorted(desc.theta.curve_pairings.items())
            },
            "vertex_pairings": {
                k: format_rational(v) for k, v in sorted(desc.theta.vertex_pairings.items())
            },
        }
        if desc.theta.face_pairings:
            out["theta"]["face_pairings"] = {
                ",".join(sorted(f)): format_rational(v)
                for f, v in desc.theta.face_pairings.items()
            }
    return out


def parse_point(raw: dict, path="point") -> dict:
    return {k: _rat(v, f"{path}/{k}") for k, v in raw.items()}


def point_to_dict(coords: dict) -> dict:
    return {k: format_rational(v) for k, v in sorted(coords.items())}


def load_obstacle(raw: dict, complex_: DualComplex) -> SkeletalPA:
    """Obstacle: vertex values plus optional 1-d breakpoints per edge."""
    values = {
        k: _rat(v, f"/obstacle/vertex_values/{k}")
        for k, v in raw.get("vertex_values", {}).items()
    }
    missing = set(complex_.component_ids) - set(values)
    if missing:
        raise SchemaError(f"/obstacle/vertex_values: missing {sorted(missing)}")
    breaks = raw.get("breakpoints", {})
    if not breaks:
        return SkeletalPA(trivial_subdivision(complex_), values)
    cuts = {}
    interior = {}
    for key, recs in breaks.items():
        edge = frozenset(_pair_key(key))
        cuts[edge] = []
        for k, rec in enumerate(recs):
            t = _rat(rec["t"], f"/obstacle/breakpoints/{key}/{k}/t")
            cuts[edge].append(t)
            interior[(edge, t)] = _rat(rec["value"], f"/obstacle/breakpoints/{key}/{k}/value")
    sub = edge_refinement(complex_, cuts)
    for vid in sub.vertices:
        if vid in values:
            continue
        name = str(vid)
        i, rest = name.split("|")
        j, t = rest.split("@")
        values[vid] = interior[(frozenset({i, j}), Fraction(t))]
    return SkeletalPA(sub, values)


def envelope_result_to_dict(result, approx=False) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "results": []}
    for r in result.results:
        rec = {
            "point": point_to_dict(r.point),
            "value": format_rational(r.value),
            "optimizer": {k: format_rational(v) for k, v in sorted(r.optimizer.items())},
            "active_curves": sorted(map(str, r.active_curves)),
            "active_obstacle": sorted(map(str, r.active_obstacle)),
        }
        if approx:
            rec["value_approx_nonauthoritative"] = f"{float(r.value):.6g}"
        out["results"].append(rec)
    return out


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
