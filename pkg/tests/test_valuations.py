from fractions import Fraction

import pytest

from skelpa.complexes import validate_complex
from skelpa.rationals import INF
from skelpa.valuations import (
    GradedSequence,
    TruncationError,
    ValuationError,
    VerticalIdeal,
    VPolynomial,
    graded_limit,
    log_abs_ideal,
    monomial_valuation,
)

F = Fraction


def chain():
    return validate_complex(
        {"components": [("E1", 1), ("E2", 1)], "faces": [["E1"], ["E2"], ["E1", "E2"]]},
        cid="chain",
    )


def test_monomial_valuation_examples():
    c = chain()
    s = c.point({"E1": F(1, 2), "E2": F(1, 2)})
    f = VPolynomial.from_exponents([{"E1": 2}, {"E2": 3}])
    assert monomial_valuation(s, f) == 1  # min(1, 3/2)
    assert monomial_valuation(s, VPolynomial.one()) == 0
    s2 = c.point({"E1": F(1, 3), "E2": F(2, 3)})
    assert monomial_valuation(s2, VPolynomial.monomial({"E1": 1, "E2": 1})) == 1
    assert monomial_valuation(s, VPolynomial.from_exponents([])) is INF


def test_truncation_contract():
    c = chain()
    s = c.point({"E1": F(1, 2), "E2": F(1, 2)})
    f = VPolynomial.from_exponents([{"E1": 4}], truncation_order=F(3, 2))
    with pytest.raises(TruncationError):
        monomial_valuation(s, f)
    g = VPolynomial.from_exponents([{"E1": 1}], truncation_order=F(3, 2))
    assert monomial_valuation(s, g) == F(1, 2)


def test_valuation_axioms_on_products_and_sums():
    c = chain()
    s = c.point({"E1": F(1, 3), "E2": F(2, 3)})
    f = VPolynomial.from_exponents([{"E1": 2}, {"E1": 1, "E2": 1}])
    g = VPolynomial.from_exponents([{"E2": 2}])
    assert monomial_valuation(s, f * g) == monomial_valuation(s, f) + monomial_valuation(s, g)
    assert monomial_valuation(s, f + g) == min(
        monomial_valuation(s, f), monomial_valuation(s, g)
    )


def test_log_abs_ideal_examples():
    c = chain()
    s = c.point({"E1": F(1, 2), "E2": F(1, 2)})
    a = VerticalIdeal(
        (
            VPolynomial.monomial({"E1": 2}),
            VPolynomial.monomial({"E1": 1, "E2": 1}),
        )
    )
    assert log_abs_ideal(a, s) == -1
    for m in (1, 3):
        assert log_abs_ideal(VerticalIdeal.principal_fiber_power(m), s) == -m
    with pytest.raises(ValuationError):
        VerticalIdeal(())


def test_log_abs_matches_max_of_divisor_functions():
    import random

    rng = random.Random(3)
    c = chain()
    # O(D1) + O(D2) with monomial generators matches pointwise max of phi_D
    d1 = {"E1": -2, "E2": 0}
    d2 = {"E1": 0, "E2": -3}
    a = VerticalIdeal(
        (
            VPolynomial.monomial({"E1": 2}),
            VPolynomial.monomial({"E2": 3}),
        )
    )
    for _ in range(50):
        t = F(rng.randint(0, 64), 64)
        s = c.point({"E1": 1 - t, "E2": t})
        sd = s.as_dict()
        phi1 = sum(F(v) * sd.get(k, F(0)) for k, v in d1.items())
        phi2 = sum(F(v) * sd.get(k, F(0)) for k, v in d2.items())
        assert log_abs_ideal(a, s) == max(phi1, phi2)


def test_graded_sequence():
    c = chain()
    s = c.point({"E1": F(1, 4), "E2": F(3, 4)})
    seq = GradedSequence.from_dict(
        {m: VerticalIdeal.principal_fiber_power(m) for m in (1, 2, 4)}
    )
    values, sup = graded_limit(seq, s)
    assert [v for _, v in values] == [-1, -1, -1]
    assert sup == -1

    grow = GradedSequence.from_dict(
        {m: VerticalIdeal((VPolynomial.monomial({"E1": 1}),)) for m in (1, 2, 4)}
    )
    values, sup = graded_limit(grow, s)
    assert [v for _, v in values] == [F(-1, 4), F(-1, 8), F(-1, 16)]
    assert sup == F(-1, 16)

    with pytest.raises(ValuationError, match="divisor closed"):
        GradedSequence.from_dict({4: VerticalIdeal.principal_fiber_power(4)})

    bad = GradedSequence(
        (
            (1, VerticalIdeal((VPolynomial.monomial({"E1": 1}),))),
            (2, VerticalIdeal((VPolynomial.monomial({"E1": 8}),))),
        )
    )
    with pytest.raises(ValuationError, match="superadditivity"):
        graded_limit(bad, s)
