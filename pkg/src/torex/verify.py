"""Numerical verification of constructed solutions: Abreu residuals, boundary behaviour,
scalar curvature and Legendre duality samples.

Rational charts (product, Calabi, Bryant) are evaluated exactly at rational stencil
points, so the residual is pure truncation error; the hyperbolic chart uses floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .ambitoric import (
    BRYANT,
    CALABI,
    HYPERBOLIC,
    PRODUCT,
    AmbitoricSolution,
    closed_form_scalar,
    evaluate_H,
)
from .errors import GridTooCoarse, OutsideDomain, UnknownChart
from .extremal import MAIN, extremal_affine
from .polytope import LabelledPolytope

REGULAR = "Regular"
POINCARE = "Poincare"
NON_POINCARE = "CuspNonPoincare"


@dataclass(frozen=True)
class ResidualReport:
    grid_n: int
    h: float
    n_points: int
    max_abs_residual: float
    worst: tuple = ()  # ((x1, x2), residual) for the largest offenders

    def to_document(self) -> dict:
        return {
            "grid_n": self.grid_n,
            "h": self.h,
            "n_points": self.n_points,
            "max_abs_residual": self.max_abs_residual,
            "worst": [{"point": [float(c) for c in p], "residual": r} for p, r in self.worst],
        }


@dataclass(frozen=True)
class BoundaryFit:
    facet: int
    classification: str
    symbolic: str
    alpha_hat: Optional[float] = None
    beta_hat: Optional[float] = None
    slope: Optional[float] = None
    profile: tuple = ()  # fitted leading coefficient per facet station
    diagnostics: dict = field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        return self.classification == self.symbolic

    def to_document(self) -> dict:
        return {
            "facet": self.facet,
            "classification": self.classification,
            "symbolic": self.symbolic,
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "slope": self.slope,
            "profile": list(self.profile),
            "diagnostics": self.diagnostics,
        }


def _exact_chart(sol: AmbitoricSolution) -> bool:
    return sol.kind in (PRODUCT, CALABI, BRYANT)


def _num(sol, v):
    return Fraction(v) if _exact_chart(sol) else float(v)


def interior_grid(P: LabelledPolytope, grid_n: int, shrink=Fraction(1, 2)) -> list[tuple]:
    """Rational grid points of the bounding box, pulled towards the centroid by `shrink`."""
    if grid_n < 2:
        raise GridTooCoarse("grid_n must be at least 2")
    V = P.vertices
    lo = [min(v[k] for v in V) for k in range(2)]
    hi = [max(v[k] for v in V) for k in range(2)]
    c = P.centroid
    pts = []
    for i in range(grid_n):
        for j in range(grid_n):
            g = (
                lo[0] + (hi[0] - lo[0]) * Fraction(2 * i + 1, 2 * grid_n),
                lo[1] + (hi[1] - lo[1]) * Fraction(2 * j + 1, 2 * grid_n),
            )
            x = tuple(c[k] + shrink * (g[k] - c[k]) for k in range(2))
            if P.contains(x, strict=True):
                pts.append(x)
    return pts


def _distance_to_boundary(P: LabelledPolytope, x) -> float:
    return min(float(f.reference(x)) / math.hypot(*f.normal) for f in P.facets)


def abreu_operator(sol: AmbitoricSolution, x, h) -> float:
    """-sum_ij d_i d_j H_ij by central second differences (exact on rational charts)."""
    x = tuple(_num(sol, v) for v in x)
    h = _num(sol, h)

    def H(dx, dy):
        return evaluate_H(sol, (x[0] + dx, x[1] + dy))

    H0 = H(0, 0)
    Hp1, Hm1 = H(h, 0), H(-h, 0)
    Hp2, Hm2 = H(0, h), H(0, -h)
    Hpp, Hpm, Hmp, Hmm = H(h, h), H(h, -h), H(-h, h), H(-h, -h)
    d11 = (Hp1[0][0] - 2 * H0[0][0] + Hm1[0][0]) / (h * h)
    d22 = (Hp2[1][1] - 2 * H0[1][1] + Hm2[1][1]) / (h * h)
    d12 = (Hpp[0][1] - Hpm[0][1] - Hmp[0][1] + Hmm[0][1]) / (4 * h * h)
    return -(d11 + 2 * d12 + d22)


def abreu_residual(sol: AmbitoricSolution, P: LabelledPolytope, grid_n: int = 10, h=1e-3,
                   keep: int = 5) -> ResidualReport:
    """Max |Abreu(H) - s| over interior grid points at distance >= 4h from the boundary."""
    s = extremal_affine(P, MAIN)
    pts = [x for x in interior_grid(P, grid_n) if _distance_to_boundary(P, x) >= 4 * h]
    if not pts:
        raise GridTooCoarse("no grid point lies at distance >= 4h from the boundary")
    res = []
    for x in pts:
        r = abreu_operator(sol, x, h) - (s(*x) if _exact_chart(sol) else float(s(*x)))
        res.append((x, abs(float(r))))
    res.sort(key=lambda p: -p[1])
    return ResidualReport(grid_n, float(h), len(pts), res[0][1], tuple(res[:keep]))


def scalar_curvature(sol: AmbitoricSolution, point, h=1e-4) -> float:
    """Closed form where available, else the Abreu operator on H."""
    if sol.kind in (PRODUCT, CALABI, HYPERBOLIC):
        return float(closed_form_scalar(sol, point))
    return float(abreu_operator(sol, point, h))


# ---------------------------------------------------------------- boundary behaviour


def _facet_endpoints(P: LabelledPolytope, j: int):
    f = P.facets[j]
    pts = [v for v in P.vertices if f.reference(v) == 0]
    return pts[0], pts[1]


def _chart_facet_name(sol: AmbitoricSolution, j: int) -> str:
    if not sol.chart.facets:
        raise UnknownChart("solution has no facet correspondence with P")
    return sol.chart.facets[j]


def symbolic_class(sol: AmbitoricSolution, P: LabelledPolytope, j: int) -> str:
    """Boundary class read off the ansatz polynomials."""
    name = _chart_facet_name(sol, j)
    if not P.facets[j].cusp:
        return REGULAR
    if sol.kind == BRYANT:
        a1, a2 = sol.labels
        return POINCARE if a1 == a2 else NON_POINCARE
    if sol.kind == HYPERBOLIC:
        return NON_POINCARE
    poly = sol.A if name.startswith("alpha") else sol.B
    d = sol.boundary
    root = {"alpha0": d.alpha0, "alpha_inf": d.alpha_inf, "beta0": d.beta0, "beta_inf": d.beta_inf}[name]
    if poly.root_multiplicity(root) == 2 and poly.deriv(3)(root) != 0:
        return POINCARE
    return NON_POINCARE


def cusp_third_derivative(sol: AmbitoricSolution, j: int) -> tuple[Fraction, Fraction]:
    """(A'', A''') of the relevant profile at the cusp root."""
    name = _chart_facet_name(sol, j)
    poly = sol.A if name.startswith("alpha") else sol.B
    d = sol.boundary
    root = {"alpha0": d.alpha0, "alpha_inf": d.alpha_inf, "beta0": d.beta0, "beta_inf": d.beta_inf}[name]
    return poly.deriv(2)(root), poly.deriv(3)(root)


def _Hee(sol, x, n):
    H = evaluate_H(sol, x)
    return H[0][0] * n[0] * n[0] + 2 * H[0][1] * n[0] * n[1] + H[1][1] * n[1] * n[1]


def _station_values(sol, P, j, t, eps_list):
    """(L, H(n,n)) along the inward ray from the facet point at parameter t toward the centroid."""
    a, b = _facet_endpoints(P, j)
    c = P.centroid
    p0 = tuple(a[k] + t * (b[k] - a[k]) for k in range(2))
    f = P.facets[j]
    out = []
    for eps in eps_list:
        eps = _num(sol, eps)
        x = tuple(_num(sol, p0[k]) + eps * (_num(sol, c[k]) - _num(sol, p0[k])) for k in range(2))
        L = sum(f.normal[k] * x[k] for k in range(2)) + _num(sol, f.offset)
        out.append((L, _Hee(sol, x, f.normal)))
    return out


def _richardson(g: Sequence, r: int = 2) -> float:
    """Extrapolate g(eps), g(eps/2), g(eps/4) to eps = 0 assuming g = g0 + c1 eps + c2 eps^2."""
    g1, g2, g3 = (float(v) for v in g)
    return (8 * g3 - 6 * g2 + g1) / 3


def boundary_report(sol: AmbitoricSolution, P: LabelledPolytope, j: int,
                    delta=Fraction(1, 10**4), stations: int = 5) -> BoundaryFit:
    """Classify the behaviour of H(e, e) near facet j and compare with the ansatz."""
    symbolic = symbolic_class(sol, P, j)
    f = P.facets[j]
    eps = [delta, delta / 2, delta / 4]
    ts = [Fraction(k, stations + 1) for k in range(1, stations + 1)]
    if not f.cusp:
        slopes = []
        for t in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            vals = _station_values(sol, P, j, t, eps)
            # H(e,e)/L with e = n/w and L = ref/w
            g = [He / (L * f.weight) for L, He in vals]
            slopes.append(_richardson(g))
        slope = float(np.mean(slopes))
        ok = max(abs(s - 2) for s in slopes) < 1e-6
        cls = REGULAR if ok else NON_POINCARE
        return BoundaryFit(j, cls, symbolic, slope=slope, profile=tuple(slopes),
                           diagnostics={"max_slope_error": max(abs(s - 2) for s in slopes)})
    kappas, betas, scale_gap = [], [], []
    for t in ts:
        vals = _station_values(sol, P, j, t, eps)
        g = [He / (L * L) for L, He in vals]
        k0 = _richardson(g)
        # two-scale stability: extrapolation from a ten times larger scale
        vals2 = _station_values(sol, P, j, t, [10 * e for e in eps])
        k1 = _richardson([He / (L * L) for L, He in vals2])
        scale_gap.append(abs(k1 - k0) / max(abs(k0), 1e-300))
        kappas.append(k0)
        # cubic correction: (H/L^2 - kappa)/L -> -beta/alpha^2
        L0, He0 = vals[-1]
        betas.append((float(He0) / float(L0) ** 2 - k0) / float(L0))
    kap = float(np.mean(kappas))
    spread = (max(kappas) - min(kappas)) / max(abs(kap), 1e-300)
    diag = {"kappa_spread": spread, "scale_gap": max(scale_gap)}
    if kap <= 0 or abs(kap) < 1e-12:
        return BoundaryFit(j, NON_POINCARE, symbolic, profile=tuple(kappas), diagnostics=diag)
    alpha_hat = 1 / kap
    beta_hat = -float(np.mean(betas)) * alpha_hat**2
    cls = POINCARE if spread < 1e-6 and max(scale_gap) < 1e-3 else NON_POINCARE
    return BoundaryFit(j, cls, symbolic, alpha_hat=alpha_hat, beta_hat=beta_hat,
                       profile=tuple(kappas), diagnostics=diag)


# ---------------------------------------------------------------- Legendre duality


@dataclass(frozen=True)
class LegendreRow:
    x: tuple
    gradient: tuple
    phi: float
    residual: float


def _fd_gradient(u: Callable, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    g = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (u(x + e) - u(x - e)) / (2 * h)
    return g


def _solve_gradient(g: Callable, y: np.ndarray, start: np.ndarray, inside: Callable,
                    tol: float = 1e-13, max_iter: int = 100) -> np.ndarray:
    """Damped Newton for g(z) = y keeping every iterate strictly inside the polytope."""
    z = start.copy()
    r = g(z) - y
    for _ in range(max_iter):
        if np.linalg.norm(r) < tol:
            break
        h = 1e-7
        J = np.column_stack([(g(z + h * e) - g(z - h * e)) / (2 * h) for e in np.eye(len(z))])
        step = np.linalg.solve(J, -r)
        t = 1.0
        while t > 1e-12:
            zn = z + t * step
            if inside(zn):
                rn = g(zn) - y
                if np.linalg.norm(rn) < np.linalg.norm(r):
                    z, r = zn, rn
                    break
            t /= 2
        else:
            break
    return z


def legendre_sample(u: Callable, P: LabelledPolytope, grid_n: int = 5,
                    grad: Optional[Callable] = None) -> list[LegendreRow]:
    """Samples (x, du(x), phi_u(du(x))) with phi_u(y) = sup_x <y, x> - u(x).

    The supremum is located by solving du(x') = y from the centroid, so the duality
    residual phi_u(du(x)) + u(x) - <du(x), x> checks both the solve and convexity.
    """
    uu = lambda z: float(u(np.asarray(z, dtype=float)))
    gg = (lambda z: np.asarray(grad(np.asarray(z, dtype=float)), dtype=float)) if grad else (
        lambda z: _fd_gradient(uu, np.asarray(z, dtype=float)))
    if P.dimension == 1:
        a, b = sorted(float(v[0]) for v in P.vertices)
        pts = [np.array([a + (b - a) * (2 * i + 1) / (2 * grid_n)]) for i in range(grid_n)]
    else:
        pts = [np.array([float(c) for c in x]) for x in interior_grid(P, grid_n)]
    start = np.array([float(c) for c in P.centroid])
    inside = lambda z: all(float(f.reference(tuple(z))) > 0 for f in P.facets)
    rows = []
    for x in pts:
        y = gg(x)
        xs = _solve_gradient(gg, y, start, inside)
        phi = float(np.dot(y, xs) - uu(xs))
        resid = phi + uu(x) - float(np.dot(y, x))
        rows.append(LegendreRow(tuple(map(float, x)), tuple(map(float, y)), phi, resid))
    return rows
