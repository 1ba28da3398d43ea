"""Parsing and formatting of exact rationals ("p/q" strings or integers)."""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import MalformedDocument

_RAT = re.compile(r"^\s*[+-]?\d+(\s*/\s*[+-]?\d+)?\s*$")


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        raise TypeError("floats are not accepted where exact rationals are required")
    return Fraction(v)


def Q(v) -> Fraction:
    """Shorthand constructor used throughout: Q('3/2'), Q(2), Q(1, 3) style via Fraction."""
    return to_fraction(v)


def parse_rational(v) -> Fraction:
    """Accept an int or a decimal-free "p/q" string; reject everything else."""
    if isinstance(v, bool):
        raise MalformedDocument(f"expected rational, got boolean {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str) and _RAT.match(v):
        try:
            return Fraction(v.replace(" ", ""))
        except ZeroDivisionError:
            raise MalformedDocument(f"zero denominator in {v!r}") from None
    raise MalformedDocument(f"expected integer or 'p/q' string, got {v!r}")


def fmt(q) -> str:
    q = to_fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
