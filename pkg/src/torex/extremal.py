"""Extremal affine functions, the Donaldson-Futaki functional and crease families.

Conventions: the main convention solves

    int_{dP \\ F} f dnu = 1/2 int_P f s dmu     for all affine f,

the appendix convention drops the 1/2 (so its solution is half the main one).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import DegenerateCrease, SingularGram
from .moments import (
    gram_matrix,
    integrate_boundary,
    integrate_interior,
    integrate_truncated,
    integrate_truncated_boundary,
    monomial_basis,
    solve_linear,
)
from .polynomial import AffineFunction, MultiPoly, UniPoly, lagrange_interpolate
from .polytope import IntervalProblem, LabelledPolytope, facet_parametrization, facet_subproblem
from .rational import to_fraction

MAIN = "main"
APPENDIX = "appendix"


@dataclass(frozen=True)
class CreaseFunction:
    """f = max(0, h)."""

    h: AffineFunction

    def __call__(self, *x):
        v = self.h(*x)
        return v if v > 0 else 0 * v

    def is_affine_on(self, P: LabelledPolytope) -> bool:
        vals = [self.h(v) for v in P.vertices]
        return not (any(v > 0 for v in vals) and any(v < 0 for v in vals))


def _as_polytope(P) -> LabelledPolytope:
    return P.to_polytope() if isinstance(P, IntervalProblem) else P


@lru_cache(maxsize=4096)
def _extremal_main(P: LabelledPolytope) -> AffineFunction:
    basis = monomial_basis(P.dimension)
    M = gram_matrix(P, basis)
    rhs = [integrate_boundary(P, b) for b in basis]
    try:
        sol = solve_linear(M, rhs)
    except ZeroDivisionError:
        raise SingularGram("Gram matrix of a full-dimensional polytope is singular") from None
    sol = [2 * c for c in sol]
    return AffineFunction(sol[1:], sol[0])


def extremal_affine(P, convention: str = MAIN) -> AffineFunction:
    s = _extremal_main(_as_polytope(P))
    if convention == MAIN:
        return s
    if convention == APPENDIX:
        return s.scale(Fraction(1, 2))
    raise ValueError(f"unknown convention {convention!r}")


def df_invariant(P, f) -> Fraction:
    """L(f) = int_{dP \\ F} f dnu - 1/2 int_P f s dmu, exactly."""
    P = _as_polytope(P)
    s = extremal_affine(P).to_multipoly()
    if isinstance(f, CreaseFunction):
        hp = f.h.to_multipoly()
        return integrate_truncated_boundary(P, f.h, hp) - integrate_truncated(P, f.h, hp * s) / 2
    if isinstance(f, AffineFunction):
        f = f.to_multipoly()
    if isinstance(f, MultiPoly):
        return integrate_boundary(P, f) - integrate_interior(P, f * s) / 2
    raise TypeError(f"cannot evaluate the functional on {type(f).__name__}")


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def crease_points(P: LabelledPolytope, edge_pair: tuple[int, int], s, t):
    i, j = edge_pair
    a, b = P.edges[i]
    c, d = P.edges[j]
    s, t = to_fraction(s), to_fraction(t)
    v = tuple((1 - s) * p + s * q for p, q in zip(P.vertices[a], P.vertices[b]))
    w = tuple((1 - t) * p + t * q for p, q in zip(P.vertices[c], P.vertices[d]))
    return v, w


def line_through(v, w) -> AffineFunction:
    """(x - v) ^ (w - v): positive to the right of the directed line v -> w."""
    d = (w[0] - v[0], w[1] - v[1])
    return AffineFunction((d[1], -d[0]), -v[0] * d[1] + v[1] * d[0])


def simple_crease(
    P: LabelledPolytope, edge_pair: tuple[int, int], s, t, orientation: str = "forward"
) -> CreaseFunction:
    """Crease through v_s on edge i and w_t on edge j.

    "forward" makes h positive on the counterclockwise boundary arc from v_s
    to w_t (the arc through the end of edge i and the start of edge j).
    """
    i, j = edge_pair
    if i == j:
        raise DegenerateCrease("edges of a crease must be distinct")
    v, w = crease_points(P, edge_pair, s, t)
    if v == w:
        raise DegenerateCrease(f"crease endpoints coincide at {v}")
    h = line_through(v, w)
    if orientation == "backward":
        h = -h
    elif orientation != "forward":
        raise ValueError(f"unknown orientation {orientation!r}")
    return CreaseFunction(h)


@dataclass(frozen=True)
class PiecewisePoly1D:
    breakpoints: tuple[Fraction, ...]
    pieces: tuple[UniPoly, ...]

    def piece_index(self, c) -> int:
        c = to_fraction(c) if not isinstance(c, float) else c
        for k in range(len(self.pieces)):
            if c <= self.breakpoints[k + 1]:
                return k
        return len(self.pieces) - 1

    def __call__(self, c):
        return self.pieces[self.piece_index(c)](c)

    def continuity_defects(self) -> list[Fraction]:
        return [
            self.pieces[k](self.breakpoints[k + 1]) - self.pieces[k + 1](self.breakpoints[k + 1])
            for k in range(len(self.pieces) - 1)
        ]

    @property
    def c_max(self) -> Fraction:
        return self.breakpoints[-1]

    def max_degree(self) -> int:
        return max(p.degree for p in self.pieces)


def _reference_label(P: LabelledPolytope, i: int) -> AffineFunction:
    f = P.facets[i]
    return AffineFunction(f.normal, f.offset)


def normal_cone_family(P, i: int) -> PiecewisePoly1D:
    """F(c) = L(max(0, c - L_i)) on [0, c_max], exact per chamber.

    Each chamber piece has degree at most 4 (slice length and s are both
    affine in c), so five interior samples determine it.
    """
    P = _as_polytope(P)
    L = _reference_label(P, i)
    values = sorted({L(v) for v in P.vertices})
    if values[0] != 0:
        raise AssertionError("reference label must vanish on its facet")
    pieces = []
    for a, b in zip(values, values[1:]):
        nodes = [a + (b - a) * Fraction(k, 6) for k in range(1, 6)]
        vals = [df_invariant(P, CreaseFunction(AffineFunction([-x for x in L.coefficients], c - L.constant))) for c in nodes]
        pieces.append(lagrange_interpolate(nodes, vals))
    return PiecewisePoly1D(tuple(values), tuple(pieces))


def restrict_to_facet(g: AffineFunction, P: LabelledPolytope, i: int) -> AffineFunction:
    """g(v0 + (t/ell) w) as an affine function of the nu-arclength t."""
    v0, w, ell = facet_parametrization(P, i)
    return AffineFunction(
        [sum(a * wi for a, wi in zip(g.coefficients, w)) / ell], g(v0)
    )


def szekelyhidi_constraint(P: LabelledPolytope, i: int) -> Fraction:
    """1/2 int_{F_i} (s_{F_i} - s) dnu_{F_i}  (main convention, reference measure)."""
    I = facet_subproblem(P, i)
    sF = extremal_affine(I)
    sr = restrict_to_facet(extremal_affine(P), P, i)
    diff = sF - sr
    ell = I.length
    return (diff.coefficients[0] * ell**2 / 2 + diff.constant * ell) / 2


def affine_basis_functions(dim: int) -> Sequence[AffineFunction]:
    out = [AffineFunction([0] * dim, 1)]
    for k in range(dim):
        e = [0] * dim
        e[k] = 1
        out.append(AffineFunction(e, 0))
    return out
