"""Labelled polytopes with cusp facets (dimension 1 and 2).

A facet is stored as a primitive inward integer normal ``n``, a rational
offset and a rational weight ``w >= 0``.  The affine label is
``L(x) = (<n, x> + offset) / w``; weight 0 marks a cusp facet, which keeps
the reference label ``<n, x> + offset`` for the measures that need one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, cmp_to_key
from typing import Iterable, Sequence

from .errors import (
    EmptyInterior,
    MalformedDocument,
    NotSimple,
    NotUnimodular,
    UnboundedPolytope,
)
from .rational import fmt, parse_rational, to_fraction

Point = tuple[Fraction, ...]


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: Fraction
    weight: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(int(c) for c in self.normal))
        object.__setattr__(self, "offset", to_fraction(self.offset))
        object.__setattr__(self, "weight", to_fraction(self.weight))
        if math.gcd(*self.normal) != 1:
            raise MalformedDocument(f"normal {self.normal} is not primitive")
        if self.weight < 0:
            raise MalformedDocument(f"negative weight {self.weight}")

    @classmethod
    def scaled(cls, normal: Sequence[int], offset, weight) -> "Facet":
        """Build from a possibly non-primitive normal, folding the gcd into the weight."""
        normal = [int(c) for c in normal]
        g = math.gcd(*normal)
        if g == 0:
            raise MalformedDocument("zero normal vector")
        offset, weight = to_fraction(offset), to_fraction(weight)
        return cls(tuple(c // g for c in normal), offset / g, weight / g)

    @property
    def cusp(self) -> bool:
        return self.weight == 0

    def reference(self, x: Sequence) -> Fraction:
        return sum(n * xi for n, xi in zip(self.normal, x)) + self.offset

    def label(self, x: Sequence) -> Fraction:
        if self.cusp:
            raise ValueError("cusp facet has no effective label")
        return self.reference(x) / self.weight


def _cross(a: Sequence, b: Sequence):
    return a[0] * b[1] - a[1] * b[0]


def _sub(a: Sequence, b: Sequence) -> Point:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class LabelledPolytope:
    """Bounded simple polygon (or interval) given by labelled facets.

    ``vertices`` are counterclockwise starting from the lexicographically
    smallest one; ``edges[j]`` gives the (start, end) vertex indices of facet j
    in that orientation.  In dimension 1 ``edges[j]`` is ``(v, v)``.
    """

    dimension: int
    facets: tuple[Facet, ...]
    vertices: tuple[Point, ...] = field(default=(), compare=False, repr=False)
    edges: tuple[tuple[int, int], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "facets", tuple(self.facets))
        if self.dimension == 1:
            verts, edges = _interval_vertices(self.facets)
        elif self.dimension == 2:
            verts, edges = _polygon_vertices(self.facets)
        else:
            raise MalformedDocument(f"dimension {self.dimension} not in {{1, 2}}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)

    # -- basic accessors --------------------------------------------------
    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def cusp_facets(self) -> tuple[int, ...]:
        return tuple(j for j, f in enumerate(self.facets) if f.cusp)

    def with_weights(self, weights: Sequence) -> "LabelledPolytope":
        return LabelledPolytope(
            self.dimension,
            tuple(Facet(f.normal, f.offset, w) for f, w in zip(self.facets, weights)),
        )

    def with_cusps(self, cusps: Iterable[int]) -> "LabelledPolytope":
        cusps = set(cusps)
        return self.with_weights(
            [0 if j in cusps else f.weight for j, f in enumerate(self.facets)]
        )

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        for f in self.facets:
            v = f.reference(x)
            if v < 0 or (strict and v == 0):
                return False
        return True

    @cached_property
    def centroid(self) -> Point:
        k = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / k for i in range(self.dimension))

    def edge_vector(self, j: int) -> Point:
        a, b = self.edges[j]
        return _sub(self.vertices[b], self.vertices[a])

    def lattice_length(self, j: int) -> Fraction:
        """Length of edge j measured by the primitive lattice vector along it."""
        if self.dimension == 1:
            return Fraction(1)
        w = self.edge_vector(j)
        n = self.facets[j].normal
        # w is a multiple of (-n2, n1)
        return abs(w[1] / n[0]) if n[0] != 0 else abs(w[0] / n[1])

    def adjacent(self, j: int) -> tuple[int, int]:
        """Facets meeting facet j at its start and end vertex."""
        a, b = self.edges[j]
        return self._other_facet(a, j), self._other_facet(b, j)

    def _other_facet(self, v: int, j: int) -> int:
        for k, f in enumerate(self.facets):
            if k != j and f.reference(self.vertices[v]) == 0:
                return k
        raise AssertionError("vertex with a single facet")

    def to_document(self) -> dict:
        return {
            "dimension": self.dimension,
            "facets": [
                {"normal": list(f.normal), "offset": fmt(f.offset), "weight": fmt(f.weight)}
                for f in self.facets
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True)


def _interval_vertices(facets: Sequence[Facet]):
    if len(facets) != 2:
        raise MalformedDocument("an interval needs exactly two facets")
    lo = hi = None
    for f in facets:
        if len(f.normal) != 1 or f.normal[0] not in (1, -1):
            raise MalformedDocument(f"bad 1-d normal {f.normal}")
        if f.normal[0] == 1:
            lo = -f.offset
        else:
            hi = f.offset
    if lo is None or hi is None:
        raise UnboundedPolytope("interval needs one facet of each orientation")
    if hi <= lo:
        raise EmptyInterior(f"interval [{lo}, {hi}] has empty interior")
    verts = ((lo,), (hi,))
    edges = tuple((0, 0) if f.normal[0] == 1 else (1, 1) for f in facets)
    return verts, edges


def _polygon_vertices(facets: Sequence[Facet]):
    if len(facets) < 3:
        raise UnboundedPolytope("a bounded polygon needs at least three facets")
    for f in facets:
        if len(f.normal) != 2:
            raise MalformedDocument(f"normal {f.normal} is not 2-dimensional")
    normals = [f.normal for f in facets]
    # bounded iff no nonzero direction d has <n_j, d> >= 0 for all j; extreme
    # rays of that cone are orthogonal to some normal
    for n in normals:
        for d in ((-n[1], n[0]), (n[1], -n[0])):
            if all(m[0] * d[0] + m[1] * d[1] >= 0 for m in normals):
                raise UnboundedPolytope(f"recession direction {d}")

    def feasible(p):
        return all(f.reference(p) >= 0 for f in facets)

    pts: list[Point] = []
    for i in range(len(facets)):
        for j in range(i + 1, len(facets)):
            a, b = facets[i], facets[j]
            det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0]
            if det == 0:
                continue
            # n_a.x = -off_a, n_b.x = -off_b
            x = Fraction(-a.offset * b.normal[1] + b.offset * a.normal[1], det)
            y = Fraction(-b.offset * a.normal[0] + a.offset * b.normal[0], det)
            p = (x, y)
            if feasible(p) and p not in pts:
                pts.append(p)
    if len(pts) < 3:
        raise EmptyInterior("the facet inequalities cut out no 2-dimensional region")
    c = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
    if any(f.reference(c) <= 0 for f in facets):
        raise EmptyInterior("centroid of the vertex set is not interior")

    def half(p):
        d = _sub(p, c)
        return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1

    def cmp(p, q):
        hp, hq = half(p), half(q)
        if hp != hq:
            return hp - hq
        cr = _cross(_sub(p, c), _sub(q, c))
        return -1 if cr > 0 else (1 if cr < 0 else 0)

    ordered = sorted(pts, key=cmp_to_key(cmp))
    start = ordered.index(min(ordered))
    ordered = ordered[start:] + ordered[:start]
    verts = tuple(ordered)
    nv = len(verts)

    on = [[j for j, f in enumerate(facets) if f.reference(v) == 0] for v in verts]
    for k, inc in enumerate(on):
        if len(inc) > 2:
            raise NotSimple(f"vertex {verts[k]} lies on {len(inc)} facets {inc}")
    edges = []
    for j in range(len(facets)):
        idx = [k for k in range(nv) if j in on[k]]
        if len(idx) != 2:
            raise MalformedDocument(
                f"facet {j} meets the polygon in {len(idx)} vertices; "
                "every facet must support an edge of positive length"
            )
        a, b = idx
        if (a + 1) % nv == b:
            edges.append((a, b))
        elif (b + 1) % nv == a:
            edges.append((b, a))
        else:
            raise NotSimple(f"facet {j} vertices are not consecutive")
    return verts, tuple(edges)


# -- interval sub-problems ------------------------------------------------


@dataclass(frozen=True)
class IntervalProblem:
    """Interval [0, length] with endpoint masses (0 marks a cusp endpoint)."""

    length: Fraction
    endpoint_masses: tuple[Fraction, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "length", to_fraction(self.length))
        object.__setattr__(
            self, "endpoint_masses", tuple(to_fraction(m) for m in self.endpoint_masses)
        )
        if self.length <= 0:
            raise EmptyInterior("interval length must be positive")
        if any(m < 0 for m in self.endpoint_masses):
            raise MalformedDocument("endpoint masses must be non-negative")

    def to_polytope(self) -> LabelledPolytope:
        m0, m1 = self.endpoint_masses
        return LabelledPolytope(
            1, (Facet((1,), 0, m0), Facet((-1,), self.length, m1))
        )


def facet_nu_density(P: LabelledPolytope, j: int, measure: str = "df", u=None) -> Fraction:
    """Constant c with  int_{F_j} f dnu = c * int_0^1 f(v0 + t w) dt.

    ``measure`` is "df" (zero on cusp facets) or "reference" (weight 1).
    If ``u`` is given it must satisfy <n_j, u> = 1 and the density is computed
    as |det(u, w)|; the result does not depend on the choice.
    """
    f = P.facets[j]
    scale = f.weight if measure == "df" else Fraction(1)
    if measure not in ("df", "reference"):
        raise ValueError(f"unknown measure {measure!r}")
    if P.dimension == 1:
        return scale
    if u is None:
        length = P.lattice_length(j)
    else:
        u = tuple(to_fraction(c) for c in u)
        if f.normal[0] * u[0] + f.normal[1] * u[1] != 1:
            raise ValueError("auxiliary vector must pair to 1 with the normal")
        length = abs(_cross(u, P.edge_vector(j)))
    return scale * length


def facet_parametrization(P: LabelledPolytope, i: int):
    """(v0, w, ell): F_i is x(t) = v0 + (t/ell) w for t in [0, ell] (reference nu-arclength)."""
    a, _ = P.edges[i]
    return P.vertices[a], P.edge_vector(i), P.lattice_length(i)


def facet_subproblem(P: LabelledPolytope, i: int) -> IntervalProblem:
    if P.dimension != 2:
        raise ValueError("facet sub-problems need a polygon")
    v0, w, ell = facet_parametrization(P, i)
    masses = []
    for j in P.adjacent(i):
        fj = P.facets[j]
        slope = abs(Fraction(fj.normal[0] * w[0] + fj.normal[1] * w[1]) / ell)
        masses.append(fj.weight / slope)
    return IntervalProblem(ell, (masses[0], masses[1]))


@dataclass(frozen=True)
class DelzantResult:
    delzant: bool
    witness: str | None = None


def delzant_check(P: LabelledPolytope) -> DelzantResult:
    if P.dimension != 2:
        raise ValueError("Delzant check is implemented for polygons")
    for j, f in enumerate(P.facets):
        if f.weight != 1:
            return DelzantResult(False, f"facet {j} has weight {fmt(f.weight)}")
    for k, v in enumerate(P.vertices):
        inc = [f.normal for f in P.facets if f.reference(v) == 0]
        d = _cross(inc[0], inc[1])
        if abs(d) != 1:
            return DelzantResult(False, f"vertex {k} normals have determinant {d}")
    return DelzantResult(True)


def unimodular_transform(P: LabelledPolytope, M: Sequence[Sequence[int]], t: Sequence) -> LabelledPolytope:
    """Image of P under x -> M x + t with M integral of determinant +-1."""
    if P.dimension == 1:
        m = int(M[0][0])
        if m not in (1, -1):
            raise NotUnimodular(f"1x1 matrix {m} is not unimodular")
        t0 = to_fraction(t[0])
        facets = []
        for f in P.facets:
            n = f.normal[0] * m
            facets.append(Facet((n,), f.offset - n * t0, f.weight))
        return LabelledPolytope(1, tuple(facets))
    (a, b), (c, d) = [[int(x) for x in row] for row in M]
    det = a * d - b * c
    if det not in (1, -1):
        raise NotUnimodular(f"determinant {det} is not +-1")
    t = tuple(to_fraction(x) for x in t)
    # n' = M^{-T} n; M^{-1} = (1/det) [[d, -b], [-c, a]]
    facets = []
    for f in P.facets:
        n0, n1 = f.normal
        m0 = (d * n0 - c * n1) * det
        m1 = (-b * n0 + a * n1) * det
        facets.append(Facet((m0, m1), f.offset - (m0 * t[0] + m1 * t[1]), f.weight))
    return LabelledPolytope(2, tuple(facets))


def apply_affine(M: Sequence[Sequence], t: Sequence, x: Sequence) -> Point:
    return tuple(
        sum(to_fraction(M[i][j]) * x[j] for j in range(len(x))) + to_fraction(t[i])
        for i in range(len(t))
    )


# -- ingestion -------------------------------------------------------------


def polytope_from_document(doc) -> LabelledPolytope:
    if not isinstance(doc, dict):
        raise MalformedDocument("top-level JSON value must be an object")
    dim = doc.get("dimension")
    if dim not in (1, 2) or isinstance(dim, bool):
        raise MalformedDocument(f"dimension must be 1 or 2, got {dim!r}")
    raw = doc.get("facets")
    if not isinstance(raw, list) or not raw:
        raise MalformedDocument("'facets' must be a non-empty list")
    facets = []
    for k, item in enumerate(raw):
        if not isinstance(item, dict):
            raise MalformedDocument(f"facet {k} is not an object")
        missing = {"normal", "offset", "weight"} - set(item)
        if missing:
            raise MalformedDocument(f"facet {k} missing keys {sorted(missing)}")
        normal = item["normal"]
        if (
            not isinstance(normal, list)
            or len(normal) != dim
            or not all(isinstance(c, int) and not isinstance(c, bool) for c in normal)
        ):
            raise MalformedDocument(f"facet {k} normal must be a list of {dim} integers")
        facets.append(
            Facet.scaled(normal, parse_rational(item["offset"]), parse_rational(item["weight"]))
        )
    return LabelledPolytope(dim, tuple(facets))


def parse_polytope(document: str) -> LabelledPolytope:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    return polytope_from_document(doc)


def compute_vertices(P: LabelledPolytope) -> list[Point]:
    return list(P.vertices)


def polygon(normals_offsets_weights: Iterable[tuple]) -> LabelledPolytope:
    """Convenience constructor from (normal, offset, weight) triples."""
    return LabelledPolytope(
        2, tuple(Facet.scaled(n, o, w) for n, o, w in normals_offsets_weights)
    )
