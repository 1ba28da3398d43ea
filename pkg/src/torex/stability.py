"""Stability of labelled triangles, quadrilaterals and intervals.

Quadrilaterals use the Hessian-determinant criterion on the crease family
phi(s, t); a single cusp edge is handled through the convex cone of stable
weight vectors; other polygons only get the exact grid scan.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import ConsistencyFailure, DegenerateCrease, MixedUnstable, NotQuadrilateral, NotTriangle
from .extremal import (
    CreaseFunction,
    PiecewisePoly1D,
    crease_points,
    df_invariant,
    line_through,
    normal_cone_family,
    simple_crease,
)
from .polynomial import AffineFunction, UniPoly, count_roots, isolate_roots, lagrange_interpolate
from .polytope import IntervalProblem, LabelledPolytope
from .rational import to_fraction

STABLE = "Stable"
SEMISTABLE = "StrictlySemistable"
UNSTABLE = "Unstable"
UNDECIDED = "Undecided"

PHI_NODES = (Fraction(0), Fraction(1, 3), Fraction(2, 3), Fraction(1))
SCAN_NODES = (Fraction(1, 5), Fraction(2, 5), Fraction(3, 5), Fraction(4, 5))


@dataclass(frozen=True)
class BiPoly33:
    """sum_{a,b <= 3} c[a][b] s^a t^b with exact coefficients."""

    coeffs: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def interpolate(cls, nodes: Sequence, values) -> "BiPoly33":
        """values[a][b] is the sample at (nodes[a], nodes[b])."""
        # interpolate in s for each t-node, then each s-coefficient in t
        rows = [lagrange_interpolate(nodes, [values[a][b] for a in range(4)]) for b in range(4)]
        coeffs = []
        for a in range(4):
            col = [r.coeffs[a] if a < len(r.coeffs) else Fraction(0) for r in rows]
            p = lagrange_interpolate(nodes, col)
            coeffs.append(tuple(p.coeffs[b] if b < len(p.coeffs) else Fraction(0) for b in range(4)))
        return cls(tuple(coeffs))

    def __call__(self, s, t):
        total = 0
        for a in range(3, -1, -1):
            row = 0
            for b in range(3, -1, -1):
                row = row * t + self.coeffs[a][b]
            total = total * s + row
        return total

    def partial(self, ds: int, dt: int, s, t):
        total = 0
        for a in range(ds, 4):
            for b in range(dt, 4):
                c = self.coeffs[a][b]
                if c == 0:
                    continue
                fa = 1
                for k in range(ds):
                    fa *= a - k
                fb = 1
                for k in range(dt):
                    fb *= b - k
                total += c * fa * fb * s ** (a - ds) * t ** (b - dt)
        return total

    def gradient(self, s, t):
        return self.partial(1, 0, s, t), self.partial(0, 1, s, t)

    def hessian(self, s, t):
        return (
            (self.partial(2, 0, s, t), self.partial(1, 1, s, t)),
            (self.partial(1, 1, s, t), self.partial(0, 2, s, t)),
        )

    def hessian_det(self, s, t) -> Fraction:
        (a, b), (_, d) = self.hessian(s, t)
        return a * d - b * b


@dataclass(frozen=True)
class StabilityVerdict:
    status: str
    witness: CreaseFunction | None = None
    witness_value: Fraction | None = None
    determinants: tuple = ()
    scan_minimum: Fraction | None = None
    notes: tuple[str, ...] = ()

    def with_notes(self, *more: str) -> "StabilityVerdict":
        return StabilityVerdict(
            self.status, self.witness, self.witness_value, self.determinants,
            self.scan_minimum, self.notes + tuple(more),
        )


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(to_fraction(x) for x in self.weights)
        if any(x < 0 for x in w) or all(x == 0 for x in w):
            raise ValueError("weights must be non-negative and not all zero")
        object.__setattr__(self, "weights", w)


# -- crease families -------------------------------------------------------


def ccw_facets(P: LabelledPolytope) -> list[int]:
    """Facet indices in counterclockwise order along the boundary."""
    return sorted(range(P.n_facets), key=lambda j: P.edges[j][0])


def crease_value(P: LabelledPolytope, pair: tuple[int, int], s, t) -> Fraction:
    v, w = crease_points(P, pair, s, t)
    if v == w:
        return Fraction(0)
    return df_invariant(P, simple_crease(P, pair, s, t))


def fit_phi(P: LabelledPolytope, pair: tuple[int, int], nodes: Sequence = PHI_NODES) -> BiPoly33:
    vals = [[crease_value(P, pair, s, t) for t in nodes] for s in nodes]
    return BiPoly33.interpolate(nodes, vals)


def _check_phi(P, pair, phi: BiPoly33, seed: int) -> None:
    rng = random.Random(seed)
    s = Fraction(rng.randint(1, 996), 997)
    t = Fraction(rng.randint(1, 996), 997)
    if phi(s, t) != crease_value(P, pair, s, t):
        raise ConsistencyFailure(f"crease family on edges {pair} is not of bidegree (3,3)")


def opposite_pairs(P: LabelledPolytope) -> list[tuple[int, int]]:
    order = ccw_facets(P)
    return [(order[0], order[2]), (order[1], order[3])]


def phi_polynomial(P: LabelledPolytope, opposite_pair: tuple[int, int]) -> BiPoly33:
    if P.dimension != 2 or P.n_facets != 4:
        raise NotQuadrilateral(f"expected 4 edges, got {P.n_facets}")
    i, j = opposite_pair
    order = ccw_facets(P)
    if (order.index(j) - order.index(i)) % 4 != 2:
        raise NotQuadrilateral(f"edges {i} and {j} are not opposite")
    return fit_phi(P, opposite_pair)


def critical_corners(P: LabelledPolytope, opposite_pair: tuple[int, int]) -> dict[int, tuple[int, int]]:
    """Map each edge between the pair to the (s, t) corner whose crease is that edge."""
    i, j = opposite_pair
    order = ccw_facets(P)
    p = order.index(i)
    after_i = order[(p + 1) % 4]  # joins end of i to start of j
    after_j = order[(p + 3) % 4]  # joins end of j to start of i
    return {after_i: (1, 0), after_j: (0, 1)}


def _pair_for_cusp(P: LabelledPolytope, e: int) -> tuple[int, int]:
    order = ccw_facets(P)
    p = order.index(e)
    return order[(p + 1) % 4], order[(p + 3) % 4]


def corner_determinant(P: LabelledPolytope, e: int, phi_cache: dict | None = None):
    """Hessian data of phi at the corner whose crease is edge e."""
    pair = _pair_for_cusp(P, e)
    if phi_cache is not None and pair in phi_cache:
        phi = phi_cache[pair]
    else:
        phi = phi_polynomial(P, pair)
        if phi_cache is not None:
            phi_cache[pair] = phi
    s, t = critical_corners(P, pair)[e]
    return phi, (s, t), phi.hessian_det(s, t), phi.hessian(s, t)


# -- interval --------------------------------------------------------------


def interval_profile(I: IntervalProblem) -> UniPoly:
    """c -> L(max(0, c - z)) on [0, length], a single cubic."""
    fam = normal_cone_family(I.to_polytope(), 0)
    return fam.pieces[0]


def interval_stability(I: IntervalProblem) -> StabilityVerdict:
    prof = interval_profile(I)
    ell = I.length
    if prof.is_zero():
        c = ell / 2
        return StabilityVerdict(
            UNSTABLE, CreaseFunction(AffineFunction([-1], c)), Fraction(0),
            notes=("functional vanishes identically",),
        )
    if count_roots(prof, 0, ell) == 0 and prof(ell / 2) > 0:
        return StabilityVerdict(STABLE)
    # locate a non-positive value
    for lo, hi in isolate_roots(prof, 0, ell):
        c = lo if lo == hi else (lo + hi) / 2
        return StabilityVerdict(
            UNSTABLE, CreaseFunction(AffineFunction([-1], c)), prof(c)
        )
    c = ell / 2
    return StabilityVerdict(UNSTABLE, CreaseFunction(AffineFunction([-1], c)), prof(c))


# -- exact scan ------------------------------------------------------------


def _incident(P: LabelledPolytope, i: int, s) -> set[int]:
    """Facets containing the point at parameter s on edge i."""
    out = {i}
    if s == 0 or s == 1:
        out.add(P.adjacent(i)[0 if s == 0 else 1])
    return out


def _crease_is_affine(P: LabelledPolytope, pair, s, t) -> bool:
    # the line through two boundary points of a convex polygon meets the
    # interior unless both points lie on a common edge
    return bool(_incident(P, pair[0], s) & _incident(P, pair[1], t))


@dataclass(frozen=True)
class ScanResult:
    minimum: Fraction | None
    argmin: tuple | None
    crease: CreaseFunction | None
    verdict: StabilityVerdict


class _IntegerGrid:
    """phi(a/n, b/n) * n^6 * D evaluated in integer arithmetic."""

    def __init__(self, phi: BiPoly33, n: int):
        den = 1
        for row in phi.coeffs:
            for c in row:
                den = den * c.denominator // math.gcd(den, c.denominator)
        self.scale = Fraction(1, den * n**6)
        self.terms = [
            (a, b, int(phi.coeffs[a][b] * den) * n ** (6 - a - b))
            for a in range(4) for b in range(4) if phi.coeffs[a][b] != 0
        ]

    def __call__(self, a: int, b: int) -> int:
        return sum(c * a**i * b**j for i, j, c in self.terms)


def _grid_min(P, pair, phi, points):
    best = None
    for s, t in points:
        if not (0 <= s <= 1 and 0 <= t <= 1) or _crease_is_affine(P, pair, s, t):
            continue
        val = phi(s, t)
        if best is None or val < best[0]:
            best = (val, s, t)
    return best


def _coarse_min(P, pair, phi, n: int):
    grid = _IntegerGrid(phi, n)
    best = None
    for a in range(n + 1):
        for b in range(n + 1):
            v = grid(a, b)
            if best is not None and v >= best[0]:
                continue
            s, t = Fraction(a, n), Fraction(b, n)
            if _crease_is_affine(P, pair, s, t):
                continue
            best = (v, s, t)
    if best is None:
        return None
    return best[0] * grid.scale, best[1], best[2]


def crease_scan(P: LabelledPolytope, grid_n: int = 50, refine_depth: int = 2) -> ScanResult:
    """Exact evaluation of L on all simple creases of a rational grid."""
    if P.dimension != 2:
        raise ValueError("crease scan needs a polygon")
    best = None
    for pair in combinations(range(P.n_facets), 2):
        phi = fit_phi(P, pair, SCAN_NODES)
        _check_phi(P, pair, phi, seed=7919 * pair[0] + pair[1])
        cand = _coarse_min(P, pair, phi, grid_n)
        if cand is None:
            continue
        step = Fraction(1, grid_n)
        for _ in range(refine_depth):
            step /= 2
            _, s0, t0 = cand
            pts = [(s0 + a * step, t0 + b * step) for a in range(-2, 3) for b in range(-2, 3)]
            finer = _grid_min(P, pair, phi, pts)
            if finer is not None and finer[0] < cand[0]:
                cand = finer
        if best is None or cand[0] < best[0]:
            best = (cand[0], pair, cand[1], cand[2])
    if best is None:
        return ScanResult(None, None, None, StabilityVerdict(UNDECIDED, notes=("no non-affine crease sampled",)))
    val, pair, s, t = best
    crease = simple_crease(P, pair, s, t)
    if val <= 0:
        verdict = StabilityVerdict(UNSTABLE, crease, val, scan_minimum=val)
    else:
        verdict = StabilityVerdict(UNDECIDED, scan_minimum=val, notes=("positive on the scanned grid",))
    return ScanResult(val, (pair, s, t), crease, verdict)


def _rational_zero(p: UniPoly, lo, hi):
    """A rational point of (lo, hi) where p <= 0, if one is exactly found."""
    if p.is_zero():
        return (lo + hi) / 2
    for a, b in isolate_roots(p, lo, hi):
        if a == b:
            return a
        for c in (a, b, (a + b) / 2):
            if lo < c < hi and p(c) <= 0:
                return c
    mid = (lo + hi) / 2
    return mid if p(mid) <= 0 else None


def pencil_witness(P: LabelledPolytope) -> tuple[CreaseFunction, Fraction] | None:
    """Zero or negative crease on the diagonals t = s, t = 1 - s of an opposite-pair family."""
    if P.n_facets != 4:
        return None
    for pair in opposite_pairs(P):
        phi = phi_polynomial(P, pair)
        for flip in (True, False):
            coeffs = [Fraction(0)] * 7
            for a in range(4):
                for b in range(4):
                    c = phi.coeffs[a][b]
                    if c == 0:
                        continue
                    # s^a (1 - s)^b or s^(a + b)
                    tb = UniPoly([1, -1]) ** b if flip else UniPoly([0, 1]) ** b
                    term = UniPoly([0, 1]) ** a * tb
                    for k, ck in enumerate(term.coeffs):
                        coeffs[k] += c * ck
            diag = UniPoly(coeffs)
            z = _rational_zero(diag, Fraction(0), Fraction(1))
            if z is None:
                continue
            t = 1 - z if flip else z
            if _crease_is_affine(P, pair, z, t):
                continue
            crease = simple_crease(P, pair, z, t)
            return crease, df_invariant(P, crease)
    return None


def family_witness(P: LabelledPolytope) -> tuple[CreaseFunction, Fraction] | None:
    """Exact search for a non-affine crease parallel to an edge with L <= 0."""
    for i in range(P.n_facets):
        fam = normal_cone_family(P, i)
        f = P.facets[i]
        for k, piece in enumerate(fam.pieces):
            lo, hi = fam.breakpoints[k], fam.breakpoints[k + 1]
            cands = []
            if piece.is_zero():
                cands.append((lo + hi) / 2)
            else:
                for a, b in isolate_roots(piece, lo, hi):
                    if a == b:
                        cands.append(a)
                cands.append((lo + hi) / 2)
                if k > 0:
                    cands.append(lo)
            for c in cands:
                if not (0 < c < fam.c_max):
                    continue
                val = piece(c)
                if val <= 0:
                    h = AffineFunction([-n for n in f.normal], c - f.offset)
                    return CreaseFunction(h), val
    return None


# -- shape-specific criteria --------------------------------------------------


def is_parallelogram(P: LabelledPolytope) -> bool:
    if P.n_facets != 4:
        return False
    a, b = opposite_pairs(P)
    par = lambda i, j: P.facets[i].normal == tuple(-c for c in P.facets[j].normal)
    return par(*a) and par(*b)


def _unstable_with_witness(P: LabelledPolytope, dets=(), note: str = "") -> StabilityVerdict:
    fw = family_witness(P) or pencil_witness(P)
    if fw is not None:
        return StabilityVerdict(UNSTABLE, fw[0], fw[1], determinants=dets, notes=(note,) if note else ())
    scan = crease_scan(P, 24, 2)
    if scan.verdict.status == UNSTABLE:
        return StabilityVerdict(UNSTABLE, scan.crease, scan.minimum, determinants=dets, notes=(note,) if note else ())
    return StabilityVerdict(
        UNSTABLE, determinants=dets,
        notes=((note,) if note else ()) + ("no explicit non-positive crease located on the grid",),
    )


def _two_cusp(P: LabelledPolytope, cusps: Sequence[int]) -> StabilityVerdict:
    order = ccw_facets(P)
    e1, e2 = cusps
    adjacent = (order.index(e1) - order.index(e2)) % 4 in (1, 3)
    cache: dict = {}
    dets = []
    for e in (e1, e2):
        phi, corner, d, hess = corner_determinant(P, e, cache)
        if phi(*corner) != 0 or any(g != 0 for g in phi.gradient(*corner)):
            raise ConsistencyFailure(f"corner of cusp edge {e} is not a critical point of phi")
        dets.append((e, d, hess[0][0] + hess[1][1]))
    det_vals = tuple((e, d) for e, d, _ in dets)
    if adjacent:
        if all(d >= 0 for _, d, _ in dets):
            notes = ("determinant zero: boundary of criterion",) if any(d == 0 for _, d, _ in dets) else ()
            return StabilityVerdict(STABLE, determinants=det_vals, notes=notes)
        return _unstable_with_witness(P, det_vals, "negative Hessian determinant")
    if all(d > 0 for _, d, _ in dets):
        if any(tr < 0 for _, _, tr in dets):
            return _unstable_with_witness(P, det_vals, "negative definite Hessian")
        return StabilityVerdict(STABLE, determinants=det_vals)
    if all(d == 0 for _, d, _ in dets):
        fw = family_witness(P) or pencil_witness(P)
        if fw is not None:
            return StabilityVerdict(SEMISTABLE, fw[0], fw[1], determinants=det_vals,
                                    notes=("non-affine crease with vanishing functional",))
        return StabilityVerdict(SEMISTABLE, determinants=det_vals)
    return _unstable_with_witness(P, det_vals, "non-positive Hessian determinant")


def combine_weights(verdicts: Sequence[tuple[WeightVector, StabilityVerdict]], coefficients: Sequence) -> StabilityVerdict:
    """Positive combination inside the cone of semistable weight vectors."""
    coefficients = [to_fraction(c) for c in coefficients]
    if any(c <= 0 for c in coefficients):
        raise ValueError("coefficients must be positive")
    statuses = [v.status for _, v in verdicts]
    if any(s not in (STABLE, SEMISTABLE) for s in statuses):
        raise MixedUnstable(f"summand statuses {statuses}")
    n = len(verdicts[0][0].weights)
    total = tuple(
        sum((c * w.weights[k] for c, (w, _) in zip(coefficients, verdicts)), Fraction(0)) for k in range(n)
    )
    status = STABLE if STABLE in statuses else SEMISTABLE
    return StabilityVerdict(status, notes=("weights " + ",".join(str(x) for x in total),))


def _one_cusp(P: LabelledPolytope, e: int) -> StabilityVerdict:
    others = [j for j in range(4) if j != e]
    parts = []
    for q in others:
        w = [Fraction(0) if j in (e, q) else Fraction(f.weight * 2) for j, f in enumerate(P.facets)]
        sub = P.with_weights(w)
        parts.append((WeightVector(tuple(w)), _two_cusp(sub, (e, q))))
    try:
        combined = combine_weights(parts, [Fraction(1, 2)] * 3)
    except MixedUnstable:
        scan = crease_scan(P, 24, 2)
        if scan.verdict.status == UNSTABLE:
            return scan.verdict
        fw = family_witness(P)
        if fw is not None:
            return StabilityVerdict(UNSTABLE, fw[0], fw[1])
        return scan.verdict.with_notes("cone argument inconclusive")
    return combined.with_notes(
        "cone argument over " + ", ".join(f"{{{e},{q}}}:{v.status}" for q, (_, v) in zip(others, parts))
    )


def _no_cusp_quadrilateral(P: LabelledPolytope) -> StabilityVerdict:
    if is_parallelogram(P):
        return StabilityVerdict(STABLE, notes=("parallelogram: explicit product solution",))
    from .ambitoric import calabi_applicable, solve_calabi_for

    if calabi_applicable(P):
        sol = solve_calabi_for(P, check_positive=False)
        if sol.positive:
            return StabilityVerdict(STABLE, notes=("Calabi-type solution with certified positivity",))
        return _unstable_with_witness(P, note="Calabi-type solution fails positivity")
    scan = crease_scan(P, 50, 2)
    return scan.verdict


def quadrilateral_stability(P: LabelledPolytope) -> StabilityVerdict:
    if P.dimension != 2 or P.n_facets != 4:
        raise NotQuadrilateral(f"expected 4 edges, got {P.n_facets}")
    cusps = P.cusp_facets
    if len(cusps) == 0:
        return _no_cusp_quadrilateral(P)
    if len(cusps) == 1:
        return _one_cusp(P, cusps[0])
    if len(cusps) == 2:
        return _two_cusp(P, cusps)
    if len(cusps) == 4:
        order = ccw_facets(P)
        crease = simple_crease(P, (order[0], order[2]), Fraction(1, 2), Fraction(1, 2))
        return StabilityVerdict(UNSTABLE, crease, df_invariant(P, crease),
                                notes=("no boundary measure: the functional vanishes",))
    return _unstable_with_witness(P, note="three cusp edges")


def triangle_stability(P: LabelledPolytope) -> StabilityVerdict:
    if P.dimension != 2 or P.n_facets != 3:
        raise NotTriangle(f"expected 3 edges, got {P.n_facets}")
    cusps = P.cusp_facets
    if len(cusps) == 1:
        return StabilityVerdict(STABLE, notes=("explicit Bochner-flat solution",))
    if len(cusps) == 2:
        c1, c2 = cusps
        (other,) = [j for j in range(3) if j not in cusps]
        apex = next(v for v in P.vertices
                    if P.facets[c1].reference(v) == 0 and P.facets[c2].reference(v) == 0)
        a, b = P.edges[other]
        mid = tuple((p + q) / 2 for p, q in zip(P.vertices[a], P.vertices[b]))
        crease = CreaseFunction(line_through(apex, mid))
        return StabilityVerdict(UNSTABLE, crease, df_invariant(P, crease), notes=("median crease",))
    if len(cusps) == 3:
        crease = simple_crease(P, (0, 1), Fraction(1, 2), Fraction(1, 2))
        return StabilityVerdict(UNSTABLE, crease, df_invariant(P, crease),
                                notes=("no boundary measure: the functional vanishes",))
    scan = crease_scan(P, 50, 2)
    if scan.verdict.status == UNSTABLE:
        return scan.verdict
    return StabilityVerdict(STABLE, scan_minimum=scan.minimum,
                            notes=("labelled simplex: explicit Bochner-flat solution; scan positive",))


def stability(P: LabelledPolytope) -> StabilityVerdict:
    if P.dimension == 1:
        return interval_stability(IntervalProblem(P.vertices[1][0] - P.vertices[0][0], _interval_masses(P)))
    if P.n_facets == 3:
        return triangle_stability(P)
    if P.n_facets == 4:
        return quadrilateral_stability(P)
    return crease_scan(P, 50, 2).verdict


def _interval_masses(P: LabelledPolytope):
    lo = next(f.weight for f in P.facets if f.normal[0] == 1)
    hi = next(f.weight for f in P.facets if f.normal[0] == -1)
    return lo, hi
