from fractions import Fraction

import pytest

from skelpa.classes import (
    ClosedForm,
    Curve,
    DataError,
    IntersectionData,
    is_nef,
    kernel_is_fiber_span,
    lipschitz_bound,
    vertex_lower_bound,
    zariski_kernel_check,
)

F = Fraction


def chain_data():
    comps = (("E1", 1), ("E2", 1))
    q = {("E1", "E1"): F(-1), ("E1", "E2"): F(1), ("E2", "E2"): F(-1)}
    curves = (
        Curve("E1", {"E1": F(-1), "E2": F(1)}),
        Curve("E2", {"E1": F(1), "E2": F(-1)}),
    )
    return IntersectionData("chain", comps, curves, q)


def chain_theta(t1=1, t2=1):
    return ClosedForm(
        "chain",
        {"E1": F(t1), "E2": F(t2)},
        {"E1": F(t1), "E2": F(t2)},
    )


def test_is_nef_examples():
    data = chain_data()
    data.validate()
    theta = chain_theta()
    assert is_nef({}, theta, data)
    verdict = is_nef({"E1": F(0), "E2": F(2)}, theta, data)
    assert not verdict
    assert verdict.witness_curve == "E2"
    assert verdict.slack == -1
    # adding the fiber X0 changes nothing
    assert bool(is_nef({"E1": F(1), "E2": F(1)}, theta, data)) == bool(
        is_nef({}, theta, data)
    )
    with pytest.raises(DataError):
        is_nef({}, theta, IntersectionData("chain", data.components, (), data.degree_matrix))


def test_nef_cone_closure():
    data = chain_data()
    theta = chain_theta()
    d1 = {"E1": F(0), "E2": F(1)}
    assert is_nef(d1, theta, data)
    # positive scaling of (theta, D) together
    assert is_nef({k: 3 * v for k, v in d1.items()}, theta.scaled(3), data)
    # additivity
    theta2 = chain_theta(2, 0)
    d2 = {"E1": F(1), "E2": F(0)}
    if is_nef(d2, theta2, data):
        assert is_nef(
            {k: d1.get(k, F(0)) + d2.get(k, F(0)) for k in ("E1', 'E2".split("', '"))},
            theta.plus(theta2),
            data,
        )


def test_zariski_examples():
    data = chain_data()
    assert zariski_kernel_check(data, {"E1": 1, "E2": 1})
    assert kernel_is_fiber_span(data, {"E1": 1, "E2": 1})

    disjoint = IntersectionData(
        "two", (("E1", 1), ("E2", 1)), (), {}
    )
    verdict = zariski_kernel_check(disjoint, {"E1": 1, "E2": 1})
    assert not verdict
    assert "disconnected" in (verdict.warning or verdict.reason)

    comps = (("E1", 1), ("E2", 1), ("E3", 1))
    q = {}
    for i in ("E1", "E2", "E3"):
        q[(i, i)] = F(-2)
    for i, j in (("E1", "E2"), ("E2", "E3"), ("E1", "E3")):
        q[(i, j)] = F(1)
    cyc = IntersectionData("cycle", comps, (), q)
    assert zariski_kernel_check(cyc, {"E1": 1, "E2": 1, "E3": 1})
    assert kernel_is_fiber_span(cyc, {"E1": 1, "E2": 1, "E3": 1})


def test_vertex_lower_bound_chain():
    data = chain_data()
    theta = chain_theta()
    bounds = vertex_lower_bound(theta, data)
    assert bounds == {"E1": F(1), "E2": F(1)}
    assert vertex_lower_bound(chain_theta(0, 0), data) == {"E1": F(0), "E2": F(0)}


def test_vertex_lower_bound_three_chain():
    comps = (("E1", 1), ("E2", 1), ("E3", 1))
    q = {
        ("E1", "E1"): F(-1),
        ("E2", "E2"): F(-2),
        ("E3", "E3"): F(-1),
        ("E1", "E2"): F(1),
        ("E2", "E3"): F(1),
    }
    data = IntersectionData("path", comps, (), q)
    theta = ClosedForm("path", {}, {"E1": F(1), "E2": F(1), "E3": F(1)})
    bounds = vertex_lower_bound(theta, data)
    lam = F(2)
    assert bounds["E1"] == lam + lam**2  # eccentricity 2
    assert bounds["E2"] == lam  # eccentricity 1


def test_lipschitz_bound_dim1():
    data = chain_data()
    assert lipschitz_bound(chain_theta(0, 0), data, {"E1", "E2"}, F(0)) == 0
    c = lipschitz_bound(chain_theta(), data, {"E1", "E2"}, F(1))
    assert c > 0
    # the affine slope-capped optimizer phi = (0, 1) has C0 <= 1 and lip 1
    assert c >= 2
