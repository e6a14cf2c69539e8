"""Command-line surface.

Exit codes separate verdicts from failures: 0 success, 1 mathematical
negative (not psh, not strictly convex, oracle mismatch, axiom violation),
2 data error, 3 inconclusive.  Output is deterministic: exact rationals,
sorted keys; decimal approximations appear only under --approx and are
marked non-authoritative.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import io as sio
from .classes import DataError, lipschitz_bound, vertex_lower_bound
from .complexes import ComplexError, barycentric_refine, star_subdivision
from .envelopes import (
    EnvelopeProblem,
    InfeasibleSystem,
    PshConstraintSystem,
    SkeletalPA,
    envelope,
    envelope_axioms,
    psh_check,
)
from .oracle import compare, envelope_at_level, oracle_envelope, refined_level
from .rationals import format_rational, parse_rational
from .valuations import ValuationError

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_DATA = 2
EXIT_INCONCLUSIVE = 3


def _emit(obj):
    sys.stdout.write(sio.dumps(obj))


def _load_json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise sio.SchemaError(f"inline JSON: {exc}") from exc


def _system(desc) -> PshConstraintSystem:
    if desc.data is None or desc.theta is None:
        raise sio.SchemaError("model file lacks intersection data or theta")
    return PshConstraintSystem(desc.complex, desc.theta, desc.data)


def cmd_validate(args):
    desc = sio.load_model(args.model)
    _emit({"ok": True, "model": sio.model_to_dict(desc)})
    return EXIT_OK


def cmd_check_psh(args):
    desc = sio.load_model(args.model)
    system = _system(desc)
    divisor = sio.parse_point(_load_json_arg(args.divisor), "divisor")
    verdict = psh_check(divisor, system)
    if verdict:
        _emit({"psh": True})
        return EXIT_OK
    _emit(
        {
            "psh": False,
            "witness_curve": verdict.witness_curve,
            "slack": format_rational(verdict.slack),
        }
    )
    return EXIT_NEGATIVE


def cmd_eval(args):
    desc = sio.load_model(args.model)
    if (args.functional is None) == (args.ideal is None):
        raise sio.SchemaError("eval needs exactly one of --functional or --ideal")
    points = [sio.parse_point(p, "points") for p in _load_json_arg(args.points)]
    rows = []
    if args.functional is not None:
        functional = sio.parse_point(_load_json_arg(args.functional), "functional")
        from .geometry import eval_affine

        for p in points:
            desc.complex.point(p)
            value = eval_affine(functional, p, set(desc.complex.component_ids))
            rows.append((p, value))
    else:
        from .valuations import VerticalIdeal, VPolynomial, log_abs_ideal

        raw = _load_json_arg(args.ideal)
        gens = tuple(
            VPolynomial.from_exponents([{k: int(e) for k, e in g.items()}])
            for g in raw.get("generators", [])
        )
        ideal = VerticalIdeal(gens, int(raw.get("twist", 0)))
        for p in points:
            rows.append((desc.complex.point(p).as_dict(), log_abs_ideal(ideal, p)))
    if args.format == "tsv":
        for p, v in rows:
            key = ";".join(f"{k}={format_rational(x)}" for k, x in sorted(p.items()))
            line = f"{key}\t{format_rational(v)}"
            if args.approx:
                line += f"\t{float(v):.6g}"
            sys.stdout.write(line + "\n")
    else:
        _emit(
            {
                "values": [
                    {"point": sio.point_to_dict(p), "value": format_rational(v)}
                    for p, v in rows
                ]
            }
        )
    return EXIT_OK


def cmd_subdivide(args):
    desc = sio.load_model(args.model)
    face = frozenset(args.face.split(","))
    point = sio.parse_point(_load_json_arg(args.point), "point")
    eps = parse_rational(args.eps)
    sub, support = star_subdivision(desc.complex, face, point, eps)
    if args.barycentric:
        sub, support = barycentric_refine(sub, support=support, max_depth=args.max_depth)
    cells = [
        {"kind": c.kind, "vertices": sorted(map(str, c.vids()))} for c in sub.cells
    ]
    out = {
        "vertices": {
            str(v): sio.point_to_dict(coords) for v, coords in sub.vertices.items()
        },
        "cells": sorted(cells, key=lambda rec: (rec["kind"], rec["vertices"])),
        "support_function": {
            "vertex_values": {
                str(v): format_rational(x) for v, x in support.vertex_values.items()
            },
            "integral": support.is_integral(),
        },
    }
    _emit(out)
    return EXIT_OK


def cmd_bounds(args):
    desc = sio.load_model(args.model)
    system = _system(desc)
    if args.kind == "vertex":
        bounds = vertex_lower_bound(system.theta, system.data)
        _emit({"vertex_lower_bounds": {k: format_rational(v) for k, v in sorted(bounds.items())}})
        return EXIT_OK
    face = frozenset(args.face.split(","))
    n_bd = parse_rational(args.boundary_norm)
    bound = lipschitz_bound(system.theta, system.data, face, n_bd)
    _emit({"face": sorted(face), "lipschitz_bound": format_rational(bound)})
    return EXIT_OK


def cmd_envelope(args):
    desc = sio.load_model(args.model)
    system = _system(desc)
    obstacle = sio.load_obstacle(_load_json_arg(args.obstacle), desc.complex)
    queries = [sio.parse_point(p, "queries") for p in _load_json_arg(args.queries)]
    if args.refine and desc.graph is None:
        raise sio.SchemaError("--refine requires a graph model (dimension 1)")
    if args.refine:
        per_level = []
        for level_idx in range(args.refine + 1):
            cuts = {}
            for key in desc.graph.merged_edges():
                pts = {Fraction(k, 2**level_idx) for k in range(1, 2**level_idx)}
                for vid, coords in obstacle.subdivision.vertices.items():
                    supp = frozenset(i for i, v in coords.items() if Fraction(v) != 0)
                    if supp == key:
                        i, j = sorted(supp)
                        pts.add(Fraction(desc.graph.multiplicities()[j]) * coords[j])
                if pts:
                    cuts[key] = sorted(pts)
            level = refined_level(desc.graph, cuts)
            res = envelope_at_level(level, obstacle, queries)
            per_level.append(
                {"level": level_idx, "values": [format_rational(v) for v in res.values()]}
            )
        _emit({"refinement_trace": per_level, "note": "values are per-determination lower bounds"})
        return EXIT_OK
    result = envelope(EnvelopeProblem(system, obstacle, tuple(queries)))
    _emit(sio.envelope_result_to_dict(result, approx=args.approx))
    return EXIT_OK


def cmd_oracle_compare(args):
    desc = sio.load_model(args.model)
    if desc.graph is None:
        raise sio.SchemaError("oracle-compare requires a graph model")
    obstacle = sio.load_obstacle(_load_json_arg(args.obstacle), desc.complex)
    queries = [sio.parse_point(p, "queries") for p in _load_json_arg(args.queries)]
    report = oracle_envelope(desc.graph, obstacle, queries, depth_cap=args.depth)
    if not report.stabilized:
        _emit({"stabilized": False, "note": report.note})
        return EXIT_INCONCLUSIVE
    main = envelope_at_level(report.level, obstacle, queries)
    diff = compare(main, report)
    out = {
        "stabilized": True,
        "level": report.level_index,
        "values": [format_rational(v) for v in report.values],
        "matches": list(diff.matches),
        "mismatches": [
            {"query": k, "main": format_rational(a), "oracle": format_rational(b)}
            for k, a, b in diff.mismatches
        ],
    }
    _emit(out)
    return EXIT_OK if diff.clean() else EXIT_NEGATIVE


def cmd_axioms(args):
    desc = sio.load_model(args.model)
    system = _system(desc)
    u = sio.load_obstacle(_load_json_arg(args.u), desc.complex)
    v_raw = _load_json_arg(args.v)
    v = sio.load_obstacle(v_raw, desc.complex)
    if set(u.subdivision.vertices) != set(v.subdivision.vertices):
        raise sio.SchemaError("u and v must share a carrier (same breakpoints)")
    v = SkeletalPA(u.subdivision, {k: v.values[k] for k in u.values})
    queries = [sio.parse_point(p, "queries") for p in _load_json_arg(args.queries)]
    report = envelope_axioms(u, v, parse_rational(args.constant), system, queries)
    _emit(
        {
            "ok": report.ok(),
            "checks": [
                {"axiom": name, "ok": ok, "detail": detail}
                for name, ok, detail in report.checks
            ],
        }
    )
    return EXIT_OK if report.ok() else EXIT_NEGATIVE


def build_parser():
    p = argparse.ArgumentParser(
        prog="skelpa",
        description="Exact computations on dual complexes: psh checks, subdivisions, bounds, envelopes.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="validate a model file")
    sp.add_argument("model")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("check-psh", help="nef check for a divisor")
    sp.add_argument("model")
    sp.add_argument("--divisor", required=True, help='e.g. \'{"E2": "2"}\'')
    sp.set_defaults(func=cmd_check_psh)

    sp = sub.add_parser("eval", help="evaluate a model function or ideal at points")
    sp.add_argument("model")
    sp.add_argument("--functional", help='divisor coefficients, e.g. \'{"E1": "-1"}\'')
    sp.add_argument(
        "--ideal",
        help='monomial generators with twist, e.g. \'{"generators": [{"E1": 2}], "twist": 0}\'',
    )
    sp.add_argument("--points", required=True)
    sp.add_argument("--format", choices=("json", "tsv"), default="json")
    sp.add_argument("--approx", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("subdivide", help="scaled-star subdivision with support function")
    sp.add_argument("model")
    sp.add_argument("--face", required=True, help="comma-separated component ids")
    sp.add_argument("--point", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--barycentric", action="store_true")
    sp.add_argument("--max-depth", type=int, default=8)
    sp.set_defaults(func=cmd_subdivide)

    sp = sub.add_parser("bounds", help="vertex or Lipschitz bounds")
    sp.add_argument("model")
    sp.add_argument("--kind", choices=("vertex", "lipschitz"), required=True)
    sp.add_argument("--face")
    sp.add_argument("--boundary-norm", default="0")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("envelope", help="exact envelope at the determination")
    sp.add_argument("model")
    sp.add_argument("--obstacle", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("--refine", type=int, default=0)
    sp.add_argument("--approx", action="store_true")
    sp.set_defaults(func=cmd_envelope)

    sp = sub.add_parser("oracle-compare", help="main vs brute-force oracle")
    sp.add_argument("model")
    sp.add_argument("--obstacle", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("--depth", type=int, default=12)
    sp.set_defaults(func=cmd_oracle_compare)

    sp = sub.add_parser("axioms", help="verify envelope axioms")
    sp.add_argument("model")
    sp.add_argument("--u", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--constant", default="1")
    sp.add_argument("--queries", required=True)
    sp.set_defaults(func=cmd_axioms)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (sio.SchemaError, ComplexError, DataError, ValuationError, FileNotFoundError) as exc:
        _emit({"error": str(exc)})
        return EXIT_DATA
    except InfeasibleSystem as exc:
        _emit({"error": str(exc), "infeasible": True})
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
