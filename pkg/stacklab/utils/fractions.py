"""Exact rationals as "p/q" strings."""
from __future__ import annotations

from fractions import Fraction
from typing import Union

FractionLike = Union[Fraction, int, str]


def format_fraction(value: FractionLike) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(value: FractionLike) -> Fraction:
    """Parses "p/q" (or a plain integer) into a Fraction. Floats are rejected, they aren't exact."""
    if isinstance(value, bool):
        raise ValueError(f"expected a rational, got {value!r}")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a rational as a 'p/q' string, got {value!r}")
    text = value.strip()
    numerator, _, denominator = text.partition("/")
    try:
        if not denominator:
            return Fraction(int(numerator))
        q = int(denominator)
        if q == 0:
            raise ValueError(f"zero denominator in {value!r}")
        return Fraction(int(numerator), q)
    except ValueError as exc:
        if "denominator" in str(exc):
            raise
        raise ValueError(f"expected a rational as a 'p/q' string, got {value!r}") from exc
