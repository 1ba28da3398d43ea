"""Preset labelled polytopes with named facets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError
from .polytope import Facet, LabelledPolytope
from .rational import to_fraction


def rational_facet(normal: Sequence, offset, weight=1) -> Facet:
    """Facet of the label (<normal, x> + offset)/weight with a rational normal."""
    normal = [to_fraction(c) for c in normal]
    den = math.lcm(*(c.denominator for c in normal))
    ints = [int(c * den) for c in normal]
    return Facet.scaled(ints, to_fraction(offset) * den, to_fraction(weight) * den)


def primitive_facet(normal: Sequence, offset) -> Facet:
    """Weight-one facet {<normal, x> + offset >= 0} with the normal made primitive."""
    normal = [to_fraction(c) for c in normal]
    den = math.lcm(*(c.denominator for c in normal))
    ints = [int(c * den) for c in normal]
    g = math.gcd(*ints)
    return Facet(tuple(c // g for c in ints), to_fraction(offset) * den / g, 1)


@dataclass(frozen=True)
class Preset:
    polytope: LabelledPolytope
    names: tuple[str, ...]
    params: tuple[tuple[str, str], ...] = ()

    def facet_index(self, token: str) -> int:
        token = token.strip()
        if token in self.names:
            return self.names.index(token)
        if token.isdigit() and int(token) < len(self.names):
            return int(token)
        raise InputError(f"unknown facet {token!r}; expected one of {', '.join(self.names)}")

    def with_cusps(self, tokens: Sequence[str]) -> LabelledPolytope:
        idx = sorted({self.facet_index(t) for t in tokens if t.strip()})
        return self.polytope.with_cusps(idx)


def hirzebruch(m: int, a) -> Preset:
    """{1 <= x1 <= a, 0 <= x2 <= m x1}: sections x1 = 1, x1 = a and fibres x2 = 0, x2 = m x1."""
    a = to_fraction(a)
    if not isinstance(m, int) or m < 1:
        raise InputError("m must be a positive integer")
    if a <= 1:
        raise InputError("a must exceed 1")
    facets = (
        Facet((1, 0), -1, 1),
        Facet((-1, 0), a, 1),
        Facet((0, 1), 0, 1),
        Facet((m, -1), 0, 1),
    )
    return Preset(
        LabelledPolytope(2, facets),
        ("s-0", "s-infinity", "fibre", "fibre2"),
        (("m", str(m)), ("a", str(a))),
    )


def hirzebruch_qk(q, k) -> Preset:
    """Vertices (0,0), (1,0), (1,q), (0,k); labels y, 1 - x, (q - k)x - y + k, x."""
    q, k = to_fraction(q), to_fraction(k)
    if q <= 0 or k <= 0:
        raise InputError("q and k must be positive")
    facets = (
        Facet((0, 1), 0, 1),
        Facet((-1, 0), 1, 1),
        rational_facet((q - k, -1), k),
        Facet((1, 0), 0, 1),
    )
    return Preset(LabelledPolytope(2, facets), ("l1", "l2", "l3", "l4"), (("q", str(q)), ("k", str(k))))


def hirzebruch_dk(d, k) -> Preset:
    """Vertices (-d,0), (k,0), (0,1), (-d,1)."""
    d, k = to_fraction(d), to_fraction(k)
    if d <= 0 or k < 0:
        raise InputError("need d > 0 and k >= 0")
    if k == 0:
        third = Facet((-1, 0), 0, 1)
    else:
        third = primitive_facet((-1 / k, -1), 1)
    facets = (
        Facet((1, 0), d, 1),
        Facet((0, 1), 0, 1),
        third,
        Facet((0, -1), 1, 1),
    )
    return Preset(LabelledPolytope(2, facets), ("f1", "f2", "f3", "f4"), (("d", str(d)), ("k", str(k))))


def simplex() -> Preset:
    facets = (Facet((1, 0), 0, 1), Facet((0, 1), 0, 1), Facet((-1, -1), 1, 1))
    return Preset(LabelledPolytope(2, facets), ("x1", "x2", "diagonal"))


def square() -> Preset:
    facets = (Facet((1, 0), 0, 1), Facet((-1, 0), 1, 1), Facet((0, 1), 0, 1), Facet((0, -1), 1, 1))
    return Preset(LabelledPolytope(2, facets), ("left", "right", "bottom", "top"))
