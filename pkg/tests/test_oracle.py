from fractions import Fraction

import pytest

from skelpa.classes import kernel_is_fiber_span, zariski_kernel_check
from skelpa.complexes import edge_refinement, trivial_subdivision
from skelpa.envelopes import SkeletalPA
from skelpa.oracle import (
    MetricGraphModel,
    OracleReport,
    OracleError,
    compare,
    envelope_at_level,
    generate_intersection_data,
    oracle_envelope,
    refined_level,
)

F = Fraction


def chain_graph(t1=1, t2=1):
    return MetricGraphModel(
        (("E1", 1, F(t1)), ("E2", 1, F(t2))),
        (("E1", "E2", 1),),
    )


def cycle3():
    return MetricGraphModel(
        (("E1", 1, F(1)), ("E2", 1, F(1)), ("E3", 1, F(1))),
        (("E1", "E2", 1), ("E2", "E3", 1), ("E1", "E3", 1)),
    )


def test_generate_intersection_data_examples():
    data = generate_intersection_data(chain_graph())
    assert data.q("E1", "E1") == -1
    assert data.q("E1", "E2") == 1
    assert zariski_kernel_check(data, {"E1": 1, "E2": 1})

    data3 = generate_intersection_data(cycle3())
    assert data3.q("E1", "E1") == -2
    assert data3.q("E1", "E2") == 1
    assert zariski_kernel_check(data3, {"E1": 1, "E2": 1, "E3": 1})
    assert kernel_is_fiber_span(data3, {"E1": 1, "E2": 1, "E3": 1})

    single = MetricGraphModel((("E1", 1, F(0)),), ())
    d1 = generate_intersection_data(single)
    assert d1.q("E1", "E1") == 0

    with pytest.raises(OracleError, match="connected"):
        MetricGraphModel((("E1", 1, 0), ("E2", 1, 0)), ())


def test_refined_level_affine_slack_preserved():
    # non-unit multiplicities: affine functions must keep coarse slacks
    g = MetricGraphModel((("E1", 1, F(2)), ("E2", 2, F(1))), (("E1", "E2", 1),))
    level = refined_level(g, {frozenset({"E1", "E2"}): [F(1, 2)]})
    data = level.system.data
    data.validate()
    mid = next(v for v in data.component_ids if "@" in str(v))
    assert data.multiplicities[mid] == 4  # lcd of (1/2, 1/4)
    # an affine function phi with phi(E1)=a, phi(E2)=c has refined row at E1
    # equal to the coarse row theta1 + b2*(c - a)
    a, c = F(-3), F(1)
    phi = {"E1": a, "E2": c, mid: (a + c) / 2}
    bprime = data.multiplicities
    theta = level.system.theta.curve_pairings
    for w in ("E1", "E2", mid):
        row = F(theta.get(w, 0)) + sum(
            F(bprime[u]) * phi[u] * data.q(u, w) for u in data.component_ids
        )
        if w == "E1":
            assert row == F(2) + 2 * (c - a)  # theta1 + b2*mu*(slope)
        elif w == "E2":
            assert row == F(1) + (a - c)  # theta2 + b1*mu*(slope)
        else:
            assert row == 0  # affine functions are harmonic at new vertices


def test_oracle_slope_cap_example():
    g = chain_graph()
    base = g.to_complex()
    u = SkeletalPA(trivial_subdivision(base), {"E1": F(0), "E2": F(3)})
    queries = ({"E2": F(1)},)
    report = oracle_envelope(g, u, queries)
    assert report.stabilized
    assert report.values == (F(1),)
    main = envelope_at_level(report.level, u, queries)
    diff = compare(main, report)
    assert diff.clean()


def test_oracle_zero_and_tent():
    g = chain_graph()
    base = g.to_complex()
    zero = SkeletalPA(trivial_subdivision(base), {"E1": F(0), "E2": F(0)})
    queries = ({"E1": F(1)}, {"E1": F(1, 2), "E2": F(1, 2)})
    report = oracle_envelope(g, zero, queries)
    assert report.stabilized and report.values == (F(0), F(0))

    sub = edge_refinement(base, {frozenset({"E1", "E2"}): [F(1, 2)]})
    mid = next(v for v in sub.vertices if "@" in str(v))
    tent = SkeletalPA(sub, {"E1": F(0), "E2": F(0), mid: F(1)})
    report = oracle_envelope(g, tent, queries + ({"E2": F(1)},))
    assert report.stabilized
    assert report.values == (F(0), F(0), F(0))


def test_compare_flags_corruption():
    g = chain_graph()
    base = g.to_complex()
    u = SkeletalPA(trivial_subdivision(base), {"E1": F(0), "E2": F(3)})
    queries = ({"E2": F(1)},)
    report = oracle_envelope(g, u, queries)
    main = envelope_at_level(report.level, u, queries)

    class Corrupt:
        def values(self):
            return [main.values()[0] + 1]

    diff = compare(Corrupt(), report)
    assert not diff.clean()
    assert diff.mismatches[0][0] == 0


def test_oracle_on_cycle_with_breakpoints():
    g = cycle3()
    base = g.to_complex()
    e12 = frozenset({"E1", "E2"})
    sub = edge_refinement(base, {e12: [F(1, 3)]})
    mid = next(v for v in sub.vertices if "@" in str(v))
    values = {"E1": F(0), "E2": F(-1), "E3": F(2), mid: F(1, 2)}
    u = SkeletalPA(sub, values)
    queries = (
        {"E1": F(1)},
        {"E2": F(1)},
        {"E1": F(1, 2), "E2": F(1, 2)},
        {"E2": F(1, 4), "E3": F(3, 4)},
    )
    report = oracle_envelope(g, u, queries)
    assert report.stabilized
    main = envelope_at_level(report.level, u, queries)
    assert compare(main, report).clean()
    # envelope dominated by the obstacle at queried carrier points
    assert report.values[0] <= 0 and report.values[1] <= -1


def test_oracle_levels_monotone_and_unverified_marking():
    g = cycle3()
    base = g.to_complex()
    sub = edge_refinement(base, {frozenset({"E1", "E2"}): [F(1, 3)]})
    mid = next(v for v in sub.vertices if "@" in str(v))
    u = SkeletalPA(sub, {"E1": F(0), "E2": F(2), "E3": F(-1), mid: F(1)})
    queries = ({"E1": F(1)}, {"E2": F(1, 2), "E3": F(1, 2)})
    report = oracle_envelope(g, u, queries)
    assert report.stabilized
    # determination monotonicity: per-level values never decrease
    for (_l1, v1), (_l2, v2) in zip(report.per_level, report.per_level[1:]):
        assert all(a <= b for a, b in zip(v1, v2))

    unstable = OracleReport(None, 0, False, None, (), "depth cap reached")
    main = envelope_at_level(report.level, u, queries)
    diff = compare(main, unstable)
    assert diff.unverified == (0, 1) and not diff.mismatches
