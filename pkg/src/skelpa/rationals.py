"""Exact rational scalars and the +infinity sentinel.

All numeric data in this package is `fractions.Fraction`; floats are never
produced or accepted.  The canonical textual form is "p/q" in lowest terms
(just "p" when the denominator is 1).
"""

from __future__ import annotations

from fractions import Fraction


class _Infinity:
    """Singleton +infinity, the valuation of the zero series."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "+inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("skelpa-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()


def parse_rational(text) -> Fraction:
    """Parse "p/q" or "p" (or an int) into a Fraction.  Floats are rejected."""
    if isinstance(text, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise ValueError("floats are not accepted; pass an exact 'p/q' string")
    s = str(text).strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    """Canonical "p/q" form; Fraction guarantees lowest terms and q > 0."""
    return str(Fraction(x))
