from fractions import Fraction

import pytest

from skelpa.classes import ClosedForm, Curve, DataError, IntersectionData
from skelpa.complexes import edge_refinement, validate_complex
from skelpa.envelopes import (
    EnvelopeProblem,
    PshConstraintSystem,
    SkeletalPA,
    envelope,
    envelope_axioms,
    max_combine,
    psh_check,
    regularization_trace,
    usc_sup_family,
)
from skelpa.valuations import GradedSequence, VerticalIdeal, VPolynomial

F = Fraction


def chain_system(t1=1, t2=1):
    c = validate_complex(
        {"components": [("E1", 1), ("E2", 1)], "faces": [["E1"], ["E2"], ["E1", "E2"]]},
        cid="chain",
    )
    q = {("E1", "E1"): F(-1), ("E1", "E2"): F(1), ("E2", "E2"): F(-1)}
    data = IntersectionData(
        "chain",
        (("E1", 1), ("E2", 1)),
        (
            Curve("E1", {"E1": F(-1), "E2": F(1)}),
            Curve("E2", {"E1": F(1), "E2": F(-1)}),
        ),
        q,
    )
    theta = ClosedForm("chain", {"E1": F(t1), "E2": F(t2)}, {"E1": F(t1), "E2": F(t2)})
    return PshConstraintSystem(c, theta, data)


def test_psh_check_examples():
    sys_ = chain_system()
    assert psh_check({}, sys_)
    v = psh_check({"E1": F(0), "E2": F(2)}, sys_)
    assert not v and v.witness_curve == "E2"
    # multiples of the fiber change nothing
    assert bool(psh_check({"E1": F(5), "E2": F(5)}, sys_))


def test_envelope_zero_obstacle():
    sys_ = chain_system()
    u = SkeletalPA.constant(sys_.determination, 0)
    queries = (
        {"E1": F(1)},
        {"E2": F(1)},
        {"E1": F(1, 2), "E2": F(1, 2)},
    )
    res = envelope(EnvelopeProblem(sys_, u, queries))
    assert res.values() == [0, 0, 0]


def test_envelope_slope_cap():
    # u linear from 0 at e1 to 3 at e2; the E2 nef row caps the value at 1
    sys_ = chain_system()
    sub = sys_.determination
    from skelpa.complexes import trivial_subdivision

    u = SkeletalPA(trivial_subdivision(sub), {"E1": F(0), "E2": F(3)})
    res = envelope(EnvelopeProblem(sys_, u, ({"E2": F(1)},)))
    assert res.values() == [1]
    (q,) = res.results
    assert q.optimizer == {"E2": F(1)}
    assert "E2" in q.active_curves or "E1" in q.active_obstacle


def test_envelope_tent_is_zero():
    sys_ = chain_system()
    c = sys_.determination
    sub = edge_refinement(c, {frozenset({"E1", "E2"}): [F(1, 2)]})
    mid = next(v for v in sub.vertices if "@" in str(v))
    u = SkeletalPA(sub, {"E1": F(0), "E2": F(0), mid: F(1)})
    queries = ({"E1": F(1)}, {"E1": F(1, 2), "E2": F(1, 2)}, {"E2": F(1)})
    res = envelope(EnvelopeProblem(sys_, u, queries))
    assert res.values() == [0, 0, 0]


def test_envelope_monotone_under_refinement():
    sys_ = chain_system()
    c = sys_.determination
    from skelpa.complexes import trivial_subdivision

    u0 = SkeletalPA(trivial_subdivision(c), {"E1": F(0), "E2": F(3)})
    coarse = envelope(
        EnvelopeProblem(sys_, u0, ({"E1": F(1, 2), "E2": F(1, 2)},))
    ).values()
    sub = edge_refinement(c, {frozenset({"E1", "E2"}): [F(1, 2)]})
    mid = next(v for v in sub.vertices if "@" in str(v))
    u1 = SkeletalPA(sub, {"E1": F(0), "E2": F(3), mid: F(3, 2)})
    fine = envelope(
        EnvelopeProblem(sys_, u1, ({"E1": F(1, 2), "E2": F(1, 2)},))
    ).values()
    assert fine[0] >= coarse[0]  # same determination here: equal is fine


def test_max_combine_examples():
    sys_ = chain_system()
    out = max_combine({"E1": F(0)}, {"E1": F(0)}, sys_)
    assert out.status == "necessary-conditions-only"
    res = max_combine({}, {"E1": F(1)}, sys_)
    # tie where s1 = 0 <-> vertex e2; the max is a convex vee
    assert res.function.evaluate({"E2": F(1)}) == 0
    assert res.function.evaluate({"E1": F(1)}) == 1
    assert res.function.evaluate({"E1": F(1, 2), "E2": F(1, 2)}) == F(1, 2)
    # max(phi, phi + const) = phi + max(0, const): adding the fiber shifts by 1
    res2 = max_combine({"E1": F(1)}, {"E1": F(2), "E2": F(1)}, sys_)
    for pt in ({"E1": F(1)}, {"E1": F(1, 4), "E2": F(3, 4)}, {"E2": F(1)}):
        base = F(pt.get("E1", 0))
        assert res2.function.evaluate(pt) == base + 1


def test_usc_sup_family():
    sys_ = chain_system()
    single = usc_sup_family([{"E1": F(1)}], sys_)
    assert single.evaluate({"E1": F(1)}) == 1
    consts = usc_sup_family(
        [{"E1": F(-1), "E2": F(-1)}, {"E1": F(-2), "E2": F(-2)}, {"E1": F(-3), "E2": F(-3)}],
        sys_,
    )
    assert consts.evaluate({"E1": F(1, 3), "E2": F(2, 3)}) == -1
    with pytest.raises(DataError):
        usc_sup_family([], sys_)


def test_envelope_axioms_chain():
    sys_ = chain_system()
    c = sys_.determination
    sub = edge_refinement(c, {frozenset({"E1", "E2"}): [F(1, 2)]})
    mid = next(v for v in sub.vertices if "@" in str(v))
    u = SkeletalPA(sub, {"E1": F(0), "E2": F(0), mid: F(1)})
    v = SkeletalPA(sub, {"E1": F(1), "E2": F(2), mid: F(1)})
    queries = ({"E1": F(1)}, {"E1": F(1, 2), "E2": F(1, 2)}, {"E2": F(1)})
    report = envelope_axioms(u, v, F(7, 3), sys_, queries)
    assert report.ok(), report.checks


def test_regularization_trace():
    sys_ = chain_system()
    seq = GradedSequence.from_dict(
        {m: VerticalIdeal((VPolynomial.monomial({"E1": 1}),)) for m in (1, 2, 4)}
    )
    queries = ({"E1": F(1, 2), "E2": F(1, 2)}, {"E1": F(1)})
    trace = regularization_trace(seq, sys_, queries)
    assert trace.gaps_monotone
    gaps = [r.gap for r in trace.rows]
    assert gaps[0] > gaps[1] > gaps[2]  # strictly shrinking toward P(0) = 0
    assert all(r.psh_status in ("certified", "necessary-only") for r in trace.rows)

    # constant sequence with shifted obstacle: gap identically zero
    const = GradedSequence.from_dict(
        {m: VerticalIdeal.principal_fiber_power(m) for m in (1, 2)}
    )
    shifted = SkeletalPA.constant(sys_.determination, -1)
    trace2 = regularization_trace(const, sys_, queries, obstacle=shifted)
    assert [r.gap for r in trace2.rows] == [0, 0]
