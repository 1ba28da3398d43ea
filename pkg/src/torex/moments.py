"""Exact integration over polygons, their edges and half-plane truncations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from .polynomial import AffineFunction, MultiPoly
from .polytope import LabelledPolytope, Point, facet_nu_density


@dataclass(frozen=True)
class HalfPlane:
    """The closed region {h >= 0}."""

    h: AffineFunction

    def __post_init__(self):
        if self.h.is_zero():
            raise ValueError("half-plane function must not vanish identically")


def _as_poly(f, dim: int) -> MultiPoly:
    if isinstance(f, MultiPoly):
        return f
    if isinstance(f, AffineFunction):
        return f.to_multipoly()
    return MultiPoly.constant(dim, f)


def _simplex_monomial(i: int, j: int) -> Fraction:
    # int over {s,t >= 0, s+t <= 1} of s^i t^j
    return Fraction(factorial(i) * factorial(j), factorial(i + j + 2))


def integrate_triangle(p0: Point, p1: Point, p2: Point, f: MultiPoly) -> Fraction:
    e1 = (p1[0] - p0[0], p1[1] - p0[1])
    e2 = (p2[0] - p0[0], p2[1] - p0[1])
    jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
    if jac == 0:
        return Fraction(0)
    g = f.compose_affine([[e1[0], e2[0]], [e1[1], e2[1]]], p0)
    return jac * sum((c * _simplex_monomial(*e) for e, c in g.terms), Fraction(0))


def integrate_polygon(vertices: Sequence[Point], f: MultiPoly) -> Fraction:
    """Fan triangulation from the first vertex; degenerate input integrates to 0."""
    if len(vertices) < 3:
        return Fraction(0)
    f.check_degree()
    p0 = vertices[0]
    return sum(
        (integrate_triangle(p0, vertices[k], vertices[k + 1], f) for k in range(1, len(vertices) - 1)),
        Fraction(0),
    )


def integrate_segment(a: Point, b: Point, f: MultiPoly) -> Fraction:
    """int_0^1 f(a + t (b - a)) dt."""
    d = [bi - ai for ai, bi in zip(a, b)]
    g = f.compose_affine([[di] for di in d], a)
    return sum((c / (e[0] + 1) for e, c in g.terms), Fraction(0))


def _interval_integral(lo, hi, f: MultiPoly) -> Fraction:
    if hi <= lo:
        return Fraction(0)
    return sum(
        (c * (hi ** (e[0] + 1) - lo ** (e[0] + 1)) / (e[0] + 1) for e, c in f.terms),
        Fraction(0),
    )


def integrate_interior(P: LabelledPolytope, f) -> Fraction:
    f = _as_poly(f, P.dimension).check_degree()
    if P.dimension == 1:
        return _interval_integral(P.vertices[0][0], P.vertices[1][0], f)
    return integrate_polygon(P.vertices, f)


def integrate_facet(P: LabelledPolytope, j: int, f, measure: str = "df") -> Fraction:
    f = _as_poly(f, P.dimension).check_degree()
    c = facet_nu_density(P, j, measure)
    if c == 0:
        return Fraction(0)
    a, b = P.edges[j]
    if P.dimension == 1:
        return c * f(P.vertices[a])
    return c * integrate_segment(P.vertices[a], P.vertices[b], f)


def integrate_boundary(P: LabelledPolytope, f, measure: str = "df") -> Fraction:
    return sum((integrate_facet(P, j, f, measure) for j in range(P.n_facets)), Fraction(0))


def clip_polygon(vertices: Sequence[Point], h: AffineFunction) -> list[Point]:
    """Sutherland-Hodgman clip of a convex polygon to {h >= 0}, exact."""
    out: list[Point] = []
    n = len(vertices)
    for k in range(n):
        p, q = vertices[k], vertices[(k + 1) % n]
        hp, hq = h(p), h(q)
        if hp >= 0:
            out.append(p)
        if (hp > 0 and hq < 0) or (hp < 0 and hq > 0):
            t = hp / (hp - hq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def clip_segment(a: Point, b: Point, h: AffineFunction) -> tuple[Fraction, Fraction] | None:
    """Parameter range [t0, t1] of a + t(b - a) inside {h >= 0}, or None."""
    ha, hb = h(a), h(b)
    if ha >= 0 and hb >= 0:
        return Fraction(0), Fraction(1)
    if ha < 0 and hb < 0:
        return None
    t = ha / (ha - hb)
    return (Fraction(0), t) if ha >= 0 else (t, Fraction(1))


def _h_of(H) -> AffineFunction:
    return H.h if isinstance(H, HalfPlane) else H


def integrate_truncated(P: LabelledPolytope, H, f) -> Fraction:
    """int over P cap {h >= 0} of f dmu."""
    h = _h_of(H)
    f = _as_poly(f, P.dimension).check_degree()
    if P.dimension == 1:
        lo, hi = P.vertices[0][0], P.vertices[1][0]
        a, c = h.coefficients[0], h.constant
        if a == 0:
            return _interval_integral(lo, hi, f) if c >= 0 else Fraction(0)
        root = -c / a
        if a > 0:
            return _interval_integral(max(lo, root), hi, f)
        return _interval_integral(lo, min(hi, root), f)
    return integrate_polygon(clip_polygon(P.vertices, h), f)


def integrate_truncated_boundary(P: LabelledPolytope, H, f, measure: str = "df") -> Fraction:
    """int over the boundary of P, restricted to {h >= 0}, of f dnu."""
    h = _h_of(H)
    f = _as_poly(f, P.dimension).check_degree()
    total = Fraction(0)
    for j in range(P.n_facets):
        c = facet_nu_density(P, j, measure)
        if c == 0:
            continue
        a, b = P.edges[j]
        if P.dimension == 1:
            v = P.vertices[a]
            if h(v) >= 0:
                total += c * f(v)
            continue
        va, vb = P.vertices[a], P.vertices[b]
        rng = clip_segment(va, vb, h)
        if rng is None or rng[0] == rng[1]:
            continue
        t0, t1 = rng
        d = (vb[0] - va[0], vb[1] - va[1])
        pa = (va[0] + t0 * d[0], va[1] + t0 * d[1])
        pb = (va[0] + t1 * d[0], va[1] + t1 * d[1])
        total += c * (t1 - t0) * integrate_segment(pa, pb, f)
    return total


def monomial_basis(dim: int) -> list[MultiPoly]:
    return [MultiPoly.constant(dim, 1)] + [MultiPoly.variable(dim, i) for i in range(dim)]


def gram_matrix(P: LabelledPolytope, basis: Sequence[MultiPoly] | None = None) -> list[list[Fraction]]:
    basis = basis or monomial_basis(P.dimension)
    n = len(basis)
    M = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            M[i][j] = M[j][i] = integrate_interior(P, basis[i] * basis[j])
    return M


def leading_minors(M: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    return [det([row[:k] for row in M[:k]]) for k in range(1, len(M) + 1)]


def det(M: Sequence[Sequence[Fraction]]) -> Fraction:
    A = [list(map(Fraction, row)) for row in M]
    n = len(A)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            out = -out
        out *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            for k in range(c, n):
                A[r][k] -= f * A[c][k]
    return out


def solve_linear(M: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Exact Gaussian elimination; raises ZeroDivisionError if singular."""
    n = len(M)
    A = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(M)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        A[c], A[piv] = A[piv], A[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                for k in range(c, n + 1):
                    A[r][k] -= f * A[c][k]
    return [A[i][n] / A[i][i] for i in range(n)]
