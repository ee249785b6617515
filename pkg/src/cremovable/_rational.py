"""Exact-rational helpers shared across modules."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational, Real


def as_fraction(value) -> Fraction:
    """Convert an int, float, Fraction or ``"num/den"`` string exactly.

    Floats are converted bit-exactly (``Fraction(0.1) != Fraction(1, 10)``).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (Rational, Real)):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def frac_str(value: Fraction) -> str:
    """Serialize as ``"num/den"`` (integers keep a ``/1`` suffix for uniformity)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text)
