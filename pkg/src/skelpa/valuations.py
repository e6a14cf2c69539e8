"""Monomial valuations, vertical ideals and support-function ideals.

Coefficients of series are abstracted to nonzero markers: after Cohen normal
form every nonzero coefficient is a unit, so only the exponent set matters
for the valuation.  Products are computed at the exponent-set level, which
may overstate the term set when cancellation would occur; multiplicativity
is therefore only asserted on cancellation-free inputs.

Truncation is a contract, not a computation: a VPolynomial may declare that
all omitted terms pair to at least `truncation_order`, and any valuation at
or above that bound is refused rather than certified.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lp import OPTIMAL, solve_lp
from .rationals import INF


class ValuationError(ValueError):
    pass


class TruncationError(ValuationError):
    """The stored terms cannot certify the requested value."""


def _freeze_exponent(alpha: dict) -> tuple:
    return tuple(sorted((i, int(k)) for i, k in alpha.items() if int(k) != 0))


@dataclass(frozen=True)
class VPolynomial:
    """Exponent set of a series with unit coefficients."""

    terms: frozenset  # of frozen exponent tuples
    truncation_order: Fraction | None = None

    @staticmethod
    def from_exponents(exponents, truncation_order=None):
        terms = frozenset(_freeze_exponent(a) for a in exponents)
        for t in terms:
            if any(k < 0 for _, k in t):
                raise ValuationError("negative exponent")
        order = None if truncation_order is None else Fraction(truncation_order)
        return VPolynomial(terms, order)

    @staticmethod
    def one():
        return VPolynomial.from_exponents([{}])

    @staticmethod
    def monomial(alpha: dict):
        return VPolynomial.from_exponents([alpha])

    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "VPolynomial") -> "VPolynomial":
        prods = set()
        for a in self.terms:
            for b in other.terms:
                acc = dict(a)
                for i, k in b:
                    acc[i] = acc.get(i, 0) + k
                prods.add(_freeze_exponent(acc))
        order = None
        if self.truncation_order is not None or other.truncation_order is not None:
            orders = [o for o in (self.truncation_order, other.truncation_order) if o is not None]
            order = min(orders)
        return VPolynomial(frozenset(prods), order)

    def __add__(self, other: "VPolynomial") -> "VPolynomial":
        order = None
        orders = [o for o in (self.truncation_order, other.truncation_order) if o is not None]
        if orders:
            order = min(orders)
        return VPolynomial(self.terms | other.terms, order)


def monomial_valuation(point, f: VPolynomial):
    """min over stored terms of <s, alpha>; +inf on the zero series.

    Raises TruncationError when the declared tail could undercut the minimum.
    """
    s = point.as_dict() if hasattr(point, "as_dict") else dict(point)
    if f.is_zero():
        return INF
    best = None
    for term in f.terms:
        val = sum(Fraction(s.get(i, 0)) * k for i, k in term)
        if best is None or val < best:
            best = val
    if f.truncation_order is not None and best >= f.truncation_order:
        raise TruncationError(
            f"valuation {best} is not certified below the truncation order {f.truncation_order}"
        )
    return best


@dataclass(frozen=True)
class VerticalIdeal:
    """Fractional ideal pi^{-twist} * (generators)."""

    generators: tuple  # of VPolynomial
    twist: int = 0

    def __post_init__(self):
        if not self.generators:
            raise ValuationError("an ideal needs at least one generator")
        if any(g.is_zero() for g in self.generators):
            raise ValuationError("zero generators are not allowed")

    @staticmethod
    def principal_fiber_power(m: int):
        """pi^m * O as an ideal: generator 1 with twist -m."""
        return VerticalIdeal((VPolynomial.one(),), -int(m))


def log_abs_ideal(ideal: VerticalIdeal, point) -> Fraction:
    """max over generators of -valuation, plus the twist."""
    vals = [monomial_valuation(point, g) for g in ideal.generators]
    return max(-v for v in vals) + ideal.twist


@dataclass(frozen=True)
class SupportFunctionIdeal:
    """Per-face monomial ideals realizing a support-function sheaf.

    Kept per face: a divisor admissible on one face is unconstrained on the
    coordinates outside it, so pooling generators across faces is unsound.
    Evaluation at a point uses the minimal face containing its support.
    """

    complex_id: str
    per_face: tuple  # ((face frozenset, (divisor dict, ...)), ...)

    def divisors_for(self, face: frozenset):
        for f, divs in self.per_face:
            if f == face:
                return divs
        raise ValuationError(f"no data for face {sorted(face)}")

    def log_abs(self, point) -> Fraction:
        s = point.as_dict() if hasattr(point, "as_dict") else dict(point)
        supp = frozenset(i for i, v in s.items() if Fraction(v) != 0)
        best_face = None
        for f, _ in self.per_face:
            if supp <= f and (best_face is None or f < best_face):
                best_face = f
        if best_face is None:
            raise ValuationError("point support is not contained in any face")
        divs = self.divisors_for(best_face)
        return max(
            sum(Fraction(c) * Fraction(s.get(i, 0)) for i, c in d.items())
            for d in divs
        )

    def as_vertical_ideal(self, face: frozenset, multiplicities: dict) -> VerticalIdeal:
        """The face's monomial generators as a twisted VerticalIdeal."""
        import math

        divs = self.divisors_for(face)
        twist = 0
        for d in divs:
            for i, c in d.items():
                b = multiplicities[i]
                # smallest m with -c + m*b >= 0
                m = max(0, math.ceil(Fraction(c) / b))
                twist = max(twist, m)
        gens = []
        for d in divs:
            alpha = {}
            for i, b in multiplicities.items():
                e = -Fraction(d.get(i, 0)) + twist * b
                if e < 0 or e.denominator != 1:
                    raise ValuationError("divisor does not define a monomial after twisting")
                if e:
                    alpha[i] = int(e)
            gens.append(VPolynomial.monomial(alpha))
        return VerticalIdeal(tuple(gens), twist)


class BoxCertificateError(ValuationError):
    def __init__(self, face, witness, got, expected):
        self.face = face
        self.witness = witness
        super().__init__(
            f"box too small on face {sorted(face)}: at {witness} the monomial sup is {got}"
            f" but the convex envelope is {expected}"
        )


def _face_envelope_value(support, face_order, carrier_vertices, x_bary):
    """Geometric convex envelope of h at a point, by exact LP.

    Variables are the values of an affine minorant at the face's vertices;
    the minorant must stay under h at every carrier vertex, which suffices
    because h is affine on carrier cells.
    """
    n = len(face_order)
    rows, rhs = [], []
    for bary, hval in carrier_vertices:
        rows.append([Fraction(b) for b in bary])
        rhs.append(Fraction(hval))
    res = solve_lp([Fraction(b) for b in x_bary], rows, rhs)
    if res.status != OPTIMAL:
        raise ValuationError("envelope LP failed")
    return res.value


def ideal_from_support_function(support, box_bound: int) -> SupportFunctionIdeal:
    """Monomial ideal of integer divisors under h, certified per face.

    Searches |coefficients| <= box_bound on each face's own coordinates and
    certifies a posteriori that the monomial sup reaches the geometric convex
    envelope at the face's vertices and barycenter; a shortfall raises a
    BoxCertificateError naming the witness point.
    """
    sub = support.subdivision
    root = sub.root()
    if not support.is_integral():
        raise TypeError("support function gradients must be integral")
    max_coeff = max(
        (abs(c) for g in support.gradients.values() for c in g.values()),
        default=Fraction(0),
    )
    if Fraction(box_bound) < max_coeff:
        raise ValuationError(
            f"box_bound {box_bound} is below the largest gradient coefficient {max_coeff}"
        )
    bmult = root.multiplicities

    per_face = []
    for face in root.maximal_faces():
        order = sorted(face)
        # carrier vertices of the face: subdivision vertices inside it
        carrier = []
        for vid, coords in sub.vertices.items():
            supp = frozenset(i for i, v in coords.items() if Fraction(v) != 0)
            if supp <= face:
                bary = [Fraction(bmult[j]) * Fraction(coords.get(j, 0)) for j in order]
                carrier.append((vid, bary, support.vertex_values[vid]))
        if not carrier:
            raise ValuationError(f"support function has no data on face {sorted(face)}")

        admissible = []
        from itertools import product

        b = int(box_bound)
        for combo in product(range(-b, b + 1), repeat=len(order)):
            dvals = dict(zip(order, combo))
            ok = True
            for _vid, bary, hval in carrier:
                pairing = sum(
                    Fraction(dvals[j]) * bary[k] / Fraction(bmult[j])
                    for k, j in enumerate(order)
                )
                if pairing > hval:
                    ok = False
                    break
            if ok:
                admissible.append({j: Fraction(v) for j, v in dvals.items() if v != 0})

        # certificate at the face's vertices and barycenter
        carrier_data = [(bary, hval) for _v, bary, hval in carrier]
        tests = []
        d = len(order)
        for k in range(d):
            bary = [Fraction(0)] * d
            bary[k] = Fraction(1)
            tests.append(bary)
        tests.append([Fraction(1, d)] * d)
        for bary in tests:
            env = _face_envelope_value(support, order, carrier_data, bary)
            point = {j: bary[k] / Fraction(bmult[j]) for k, j in enumerate(order)}
            got = max(
                (
                    sum(Fraction(dv.get(j, 0)) * point[j] for j in order)
                    for dv in admissible
                ),
                default=None,
            )
            if got is None or got != env:
                raise BoxCertificateError(face, point, got, env)
        per_face.append((face, tuple(admissible)))
    return SupportFunctionIdeal(root.cid, tuple(per_face))


@dataclass(frozen=True)
class GradedSequence:
    """Finite family m -> VerticalIdeal over a divisor-closed index set."""

    ideals: tuple  # ((m, VerticalIdeal), ...) sorted by m

    @staticmethod
    def from_dict(d: dict) -> "GradedSequence":
        items = tuple(sorted((int(m), a) for m, a in d.items()))
        if not items:
            raise ValuationError("empty graded sequence")
        index = {m for m, _ in items}
        for m in index:
            for k in range(1, m):
                if m % k == 0 and k not in index:
                    raise ValuationError(f"index set not divisor closed: {k} missing")
        return GradedSequence(items)

    def indices(self):
        return [m for m, _ in self.ideals]

    def ideal(self, m: int) -> VerticalIdeal:
        for k, a in self.ideals:
            if k == m:
                return a
        raise ValuationError(f"no ideal at index {m}")


def graded_limit(seq: GradedSequence, point):
    """Normalized values phi_m = log|a_m| / m with certificates.

    Checks super-additivity at the point for all stored pairs and
    monotonicity along divisibility, then reports the values and the best
    certified lower bound for the limit.
    """
    values = {}
    for m, a in seq.ideals:
        values[m] = log_abs_ideal(a, point) / m
    index = set(values)
    for m in sorted(index):
        for l in sorted(index):
            if m + l in index:
                if m * values[m] + l * values[l] > (m + l) * values[m + l]:
                    raise ValuationError(
                        f"superadditivity violated at ({m}, {l})"
                    )
    for m in sorted(index):
        for l in sorted(index):
            if l > m and l % m == 0 and values[l] < values[m]:
                raise ValuationError(
                    f"superadditivity violated at ({m}, {l}): values decrease along divisibility"
                )
    ordered = sorted(values.items())
    return ordered, max(values.values())
