"""Explicit extremal solutions: product, Calabi, hyperbolic ambitoric and Bryant.

Each solution lives on a chart polytope and is carried onto the input polytope P
by an affine map x_c = M x + tau together with a label scale lam, so that
L_P(x) = lam * L_c(M x + tau). Then

    H_P(x) = (1/lam) M^{-1} H_c(M x + tau) M^{-T},    s_P(x) = s_c(M x + tau)/lam.

Boundary data convention (inward-positive derivatives at non-cusp roots):

    Product     A'(alpha_k) = 2 r_{alpha,k}            B'(beta_k) = 2 r_{beta,k}
    Calabi      A'(alpha_k) = 2 alpha_k r_{alpha,k}     B'(beta_k) = 2 r_{beta,k}
    Hyperbolic  A'(alpha_k) = -2 r_{alpha,k}           B'(beta_k) = 2 r_{beta,k}

so that for Product and Calabi r_{.,0} >= 0 >= r_{.,inf}, and cusp sides have r = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import (
    ConsistencyFailure,
    InconsistentBeta,
    NoRootInInterval,
    NotQuadrilateral,
    NotSimplexNormalized,
    NotTriangle,
    OppositeCusps,
    OutsideDomain,
    PositivityFailure,
    UnknownChart,
)
from .moments import solve_linear
from .polynomial import UniPoly, count_roots, isolate_roots, positive_on, refine_root
from .polytope import LabelledPolytope
from .rational import fmt, to_fraction

PRODUCT = "Product"
CALABI = "Calabi"
HYPERBOLIC = "Hyperbolic"
BRYANT = "Bryant"
FIBRE_ONLY = "FibreOnly"
FIBRE_PLUS_SECTION = "FibrePlusSection"


@dataclass(frozen=True)
class AnsatzBoundaryData:
    alpha0: Fraction
    alpha_inf: Fraction
    beta0: Fraction
    beta_inf: Fraction
    r_alpha0: Fraction
    r_alpha_inf: Fraction
    r_beta0: Fraction
    r_beta_inf: Fraction

    def __post_init__(self):
        for k in self.__dataclass_fields__:
            object.__setattr__(self, k, to_fraction(getattr(self, k)))

    def to_document(self) -> dict:
        return {k: fmt(getattr(self, k)) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class ChartMap:
    """x_c = M x + tau with label scale lam; identity by default."""

    M: tuple = ((1, 0), (0, 1))
    tau: tuple = (0, 0)
    lam: object = 1
    facets: tuple = ()  # chart facet name per facet of P (None when P is the chart)

    def to_chart(self, x):
        (a, b), (c, d) = self.M
        return (a * x[0] + b * x[1] + self.tau[0], c * x[0] + d * x[1] + self.tau[1])

    def inverse(self):
        (a, b), (c, d) = self.M
        det = a * d - b * c
        return ((d / det, -b / det), (-c / det, a / det))

    def pull_back_H(self, Hc):
        """(1/lam) M^{-1} Hc M^{-T}."""
        (p, q), (r, s) = self.inverse()
        h11, h12, h22 = Hc[0][0], Hc[0][1], Hc[1][1]
        t11 = p * h11 + q * h12
        t12 = p * h12 + q * h22
        t21 = r * h11 + s * h12
        t22 = r * h12 + s * h22
        a11 = (t11 * p + t12 * q) / self.lam
        a12 = (t11 * r + t12 * s) / self.lam
        a22 = (t21 * r + t22 * s) / self.lam
        return ((a11, a12), (a12, a22))

    def to_document(self) -> dict:
        return {
            "M": [[_num(v) for v in row] for row in self.M],
            "tau": [_num(v) for v in self.tau],
            "lam": _num(self.lam),
            "facets": list(self.facets),
        }


def _num(v):
    return fmt(v) if isinstance(v, (Fraction, int)) else repr(float(v))


@dataclass(frozen=True)
class AmbitoricSolution:
    kind: str
    A: Optional[UniPoly]
    B: Optional[UniPoly]
    boundary: AnsatzBoundaryData
    chart: ChartMap = field(default_factory=ChartMap)
    labels: tuple = ()  # Bryant simplex labels (a1, a2)
    case: str = ""
    positive: bool = True
    certificate: tuple = ()
    cusps: tuple = ()  # chart facet names that are cusps

    def to_document(self) -> dict:
        doc = {
            "kind": self.kind,
            "boundary": self.boundary.to_document(),
            "chart": self.chart.to_document(),
            "positive": self.positive,
            "certificate": list(self.certificate),
            "cusps": list(self.cusps),
        }
        if self.case:
            doc["case"] = self.case
        if self.A is not None:
            doc["A"] = [fmt(c) for c in self.A.coeffs]
            doc["B"] = [fmt(c) for c in self.B.coeffs]
        if self.labels:
            doc["labels"] = [fmt(c) for c in self.labels]
        return doc


def _certify(p: UniPoly, a, b, name: str) -> tuple[bool, str]:
    ok = positive_on(p, a, b)
    n = count_roots(p, a, b) if not p.is_zero() else -1
    return ok, f"{name}: {n} roots in ({_num(a)}, {_num(b)}), positive={ok}"


def _quad_vertices(P: LabelledPolytope):
    if P.dimension != 2 or P.n_facets != 4:
        raise NotQuadrilateral("need a quadrilateral")


def _parallel(P: LabelledPolytope, i: int, j: int) -> bool:
    a, b = P.facets[i].normal, P.facets[j].normal
    return a[0] * b[1] - a[1] * b[0] == 0


def _opposite(P: LabelledPolytope) -> list[tuple[int, int]]:
    order = _facet_cycle(P)
    return [(order[0], order[2]), (order[1], order[3])]


def _facet_cycle(P: LabelledPolytope) -> list[int]:
    """Facet indices in boundary order (each adjacent to the next)."""
    order = [0]
    while len(order) < P.n_facets:
        a, b = P.adjacent(order[-1])
        nxt = b if b not in order else a
        if nxt in order:
            break
        order.append(nxt)
    return order


# ---------------------------------------------------------------- product


def _cubic_profile(length, d0, dinf) -> UniPoly:
    """A = x(len - x)(p + q x) with A'(0) = d0, A'(len) = dinf."""
    p = d0 / length
    q = (-dinf / length - p) / length
    return UniPoly([0, length, -1]) * UniPoly([p, q])


def product_profile(alpha0, alpha_inf, r0, rinf) -> UniPoly:
    """Cubic with roots alpha0, alpha_inf and A'(alpha0) = 2 r0, A'(alpha_inf) = 2 rinf."""
    alpha0, alpha_inf = to_fraction(alpha0), to_fraction(alpha_inf)
    base = _cubic_profile(alpha_inf - alpha0, 2 * to_fraction(r0), 2 * to_fraction(rinf))
    return base.compose(UniPoly([-alpha0, 1]))


def is_parallelogram(P: LabelledPolytope) -> bool:
    if P.dimension != 2 or P.n_facets != 4:
        return False
    return all(_parallel(P, i, j) for i, j in _opposite(P))


def solve_product(P: LabelledPolytope) -> AmbitoricSolution:
    """Separable solution H = diag(A(X), B(Y)) on a labelled parallelogram."""
    _quad_vertices(P)
    if not is_parallelogram(P):
        raise NotQuadrilateral("product ansatz needs a parallelogram")
    (i, i2), (j, j2) = _opposite(P)
    fi, fi2, fj, fj2 = (P.facets[k] for k in (i, i2, j, j2))
    if fi.cusp and fi2.cusp or fj.cusp and fj2.cusp:
        raise OppositeCusps("opposite sides are both cusps")
    # chart coordinates are the reference labels of facets i and j
    M = (tuple(Fraction(c) for c in fi.normal), tuple(Fraction(c) for c in fj.normal))
    tau = (fi.offset, fj.offset)
    ai = sum(fi.reference(v) for v in P.vertices if fi2.reference(v) == 0) / 2
    bj = sum(fj.reference(v) for v in P.vertices if fj2.reference(v) == 0) / 2
    # facet i2 has reference label (ai - X): its normal is -n_i exactly
    if fi2.normal != tuple(-c for c in fi.normal) or fj2.normal != tuple(-c for c in fj.normal):
        raise UnknownChart("parallel facets with non-opposite primitive normals")
    data = AnsatzBoundaryData(
        Fraction(0), ai, Fraction(0), bj, fi.weight, -fi2.weight, fj.weight, -fj2.weight
    )
    A = product_profile(0, ai, data.r_alpha0, data.r_alpha_inf)
    B = product_profile(0, bj, data.r_beta0, data.r_beta_inf)
    okA, cA = _certify(A, 0, ai, "A")
    okB, cB = _certify(B, 0, bj, "B")
    if not (okA and okB):
        raise PositivityFailure("product profile not positive")
    names = {i: "alpha0", i2: "alpha_inf", j: "beta0", j2: "beta_inf"}
    chart = ChartMap(M, tau, 1, tuple(names[k] for k in range(4)))
    cusps = tuple(names[k] for k in P.cusp_facets)
    return AmbitoricSolution(PRODUCT, A, B, data, chart, certificate=(cA, cB), cusps=cusps)


# ---------------------------------------------------------------- Calabi


def solve_calabi(data: AnsatzBoundaryData) -> AmbitoricSolution:
    """Quartic A and quadratic B with A''(0) + B''(0) = 0 in the chart (x1, x2) = (x, x y)."""
    if data.r_beta0 != -data.r_beta_inf or data.r_beta0 <= 0:
        raise InconsistentBeta("need r_beta0 = -r_beta_inf > 0")
    a0, ainf, b0, binf = data.alpha0, data.alpha_inf, data.beta0, data.beta_inf
    if not (0 <= b0 < binf and 0 < a0 < ainf):
        raise UnknownChart("Calabi data out of order")
    r = data.r_beta0
    c = 2 * r / (binf - b0)
    B = UniPoly([-b0, 1]) * UniPoly([binf, -1]) * UniPoly([c])
    rows, rhs = [], []
    for x, d in ((a0, 2 * a0 * data.r_alpha0), (ainf, 2 * ainf * data.r_alpha_inf)):
        rows.append([x**k for k in range(5)])
        rhs.append(0)
        rows.append([k * x ** (k - 1) if k else 0 for k in range(5)])
        rhs.append(d)
    rows.append([0, 0, 1, 0, 0])
    rhs.append(-B.deriv(2)(Fraction(0)) / 2)
    A = UniPoly(solve_linear(rows, rhs))
    okA, cA = _certify(A, a0, ainf, "A")
    okB, cB = _certify(B, b0, binf, "B")
    cusps = tuple(
        n for n, rr in (("alpha0", data.r_alpha0), ("alpha_inf", data.r_alpha_inf)) if rr == 0
    )
    return AmbitoricSolution(
        CALABI, A, B, data, positive=okA and okB, certificate=(cA, cB), cusps=cusps
    )


def _calabi_frame(P: LabelledPolytope):
    """Chart data for a trapezoid, or None when the Calabi ansatz does not apply."""
    if P.dimension != 2 or P.n_facets != 4 or is_parallelogram(P):
        return None
    pairs = _opposite(P)
    par = [p for p in pairs if _parallel(P, *p)]
    if len(par) != 1:
        return None
    (e0, e1), (g0, g1) = par[0], next(p for p in pairs if p != par[0])
    F = P.facets
    if F[g0].cusp or F[g1].cusp:
        return None
    # O = intersection of the non-parallel lines
    (p, q), (r, s) = F[g0].normal, F[g1].normal
    det = Fraction(p * s - q * r)
    O = ((-F[g0].offset * s + F[g1].offset * q) / det, (-p * F[g1].offset + r * F[g0].offset) / det)
    cen = P.centroid
    nE = F[e0].normal
    sigma = 1 if nE[0] * (cen[0] - O[0]) + nE[1] * (cen[1] - O[1]) > 0 else -1
    u = (sigma * nE[0], sigma * nE[1])
    # alpha0 facet has inward normal u
    near, far = (e0, e1) if F[e0].normal == u else (e1, e0)
    nG0, nG1 = F[g0].normal, F[g1].normal
    # nG1 = a u + b nG0
    dd = Fraction(u[0] * nG0[1] - u[1] * nG0[0])
    a = (nG1[0] * nG0[1] - nG1[1] * nG0[0]) / dd
    b = (u[0] * nG1[1] - u[1] * nG1[0]) / dd
    if b >= 0:
        return None
    beta_inf = -a / b
    rho0, rho1 = F[g0].weight, F[g1].weight / (-b)
    M = (u, nG0)
    tau = tuple(-(M[k][0] * O[0] + M[k][1] * O[1]) for k in range(2))
    tau = (Fraction(tau[0]), Fraction(tau[1]))
    alpha0 = -(F[near].offset + u[0] * O[0] + u[1] * O[1])
    alpha_inf = F[far].offset - (u[0] * O[0] + u[1] * O[1])
    if not (alpha0 > 0 and beta_inf > 0):
        return None
    names = {near: "alpha0", far: "alpha_inf", g0: "beta0", g1: "beta_inf"}
    data = AnsatzBoundaryData(
        Fraction(alpha0), Fraction(alpha_inf), Fraction(0), beta_inf,
        F[near].weight, -F[far].weight, rho0, -rho1,
    )
    chart = ChartMap((tuple(map(Fraction, u)), tuple(map(Fraction, nG0))), tau, 1,
                     tuple(names[k] for k in range(4)))
    return data, chart


def calabi_applicable(P: LabelledPolytope) -> bool:
    fr = _calabi_frame(P)
    return fr is not None and fr[0].r_beta0 == -fr[0].r_beta_inf


def solve_calabi_for(P: LabelledPolytope, check_positive: bool = True) -> AmbitoricSolution:
    fr = _calabi_frame(P)
    if fr is None:
        raise UnknownChart("polytope is not a Calabi-type trapezoid")
    data, chart = fr
    sol = solve_calabi(data)
    if check_positive and not sol.positive:
        raise PositivityFailure("Calabi profile A is not positive")
    return AmbitoricSolution(
        CALABI, sol.A, sol.B, data, chart, positive=sol.positive,
        certificate=sol.certificate, cusps=sol.cusps,
    )


# ---------------------------------------------------------------- hyperbolic


@dataclass(frozen=True)
class RatFunc:
    """Rational function num/den in one variable, exact."""

    num: UniPoly
    den: UniPoly = UniPoly([1])

    @staticmethod
    def of(v) -> "RatFunc":
        return v if isinstance(v, RatFunc) else RatFunc(UniPoly([to_fraction(v)]))

    def __add__(self, o):
        o = RatFunc.of(o)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, o):
        return self + (-RatFunc.of(o))

    def __rsub__(self, o):
        return RatFunc.of(o) - self

    def __mul__(self, o):
        o = RatFunc.of(o)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = RatFunc.of(o)
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, o):
        return RatFunc.of(o) / self

    def __pow__(self, n: int):
        return RatFunc(self.num**n, self.den**n)

    def __call__(self, t):
        return self.num(t) / self.den(t)


def _hyper_values(t, ai, m, b, case, section="beta_inf"):
    """Coefficient data at alpha0 = t; works for floats, Fractions and RatFunc."""
    b2 = b * b
    alpha3 = -(ai * ai + 2 * t * ai + b2) / (2 * ai + t + t * ai * ai / b2)
    qt = -t * ai * ai * alpha3 / b2
    r_a0 = (t * t - ai * ai) / (m * (ai * ai - b2))
    c = 2 * r_a0 / ((t - ai) ** 2 * (t - alpha3))
    if case == FIBRE_ONLY:
        p = 0 * t
        residual = c * b * (b2 + qt) + 1
    elif case == FIBRE_PLUS_SECTION and section == "beta_inf":
        beta3 = qt / b
        p = -(b + beta3)
        residual = 2 * c * b2 * (b + beta3) + 1
    elif case == FIBRE_PLUS_SECTION and section == "beta0":
        p = (b2 + qt) / b
        residual = 2 * c * b * (b2 + qt) + 1
    else:
        raise ValueError(f"unknown cusp case {case!r}")
    return dict(alpha3=alpha3, q=qt, c=c, p=p, r_a0=r_a0, residual=residual)


def _hyperbolic_system(m, alpha_inf, b, case, section="beta_inf"):
    """Coefficient data as rational functions of t = alpha0."""
    t = RatFunc(UniPoly([0, 1]))
    return _hyper_values(t, to_fraction(alpha_inf), to_fraction(m), to_fraction(b), case, section)


def _hyper_AB(sysd, t: Fraction, alpha_inf, b):
    v = {k: f(t) for k, f in sysd.items() if k != "residual"}
    c = v["c"]
    A = UniPoly.from_roots([t, alpha_inf, alpha_inf, v["alpha3"]], lead=-c)
    B = UniPoly([-b * b, 0, 1]) * UniPoly([v["q"], v["p"], 1]) * UniPoly([c])
    return A, B, v


def hyperbolic_alpha0_candidates(m, alpha_inf, case, b=1, section="beta_inf"):
    sysd = _hyperbolic_system(m, alpha_inf, to_fraction(b), case, section)
    R = sysd["residual"].num
    return sysd, R, isolate_roots(R, to_fraction(b), to_fraction(alpha_inf))


def solve_hyperbolic(
    m, alpha_inf, case: str = FIBRE_ONLY, b=1, section: str = "beta_inf",
    near=None, precision=Fraction(1, 10**30),
):
    """Hyperbolic ambitoric solution in the q(z) = 2z chart with a cusp on the alpha_inf side.

    alpha0 is a root of the residual boundary equation in (b, alpha_inf), isolated by
    Sturm sequences and refined to `precision` (the one closest to `near` when several
    exist); A and B are stored exactly at that rational approximation, so the
    extremality identities hold exactly. For FibrePlusSection, `section` names the
    cusp section (B gets a double root there).
    """
    b, ai = to_fraction(b), to_fraction(alpha_inf)
    if not (0 < b < ai):
        raise UnknownChart("need 0 < b < alpha_inf")
    sysd, R, roots = hyperbolic_alpha0_candidates(m, ai, case, b, section)
    good = []
    for iv in roots:
        lo, hi = refine_root(R, iv, precision)
        t = (lo + hi) / 2
        if sysd["c"].den(t) == 0:
            continue
        A, B, v = _hyper_AB(sysd, t, ai, b)
        if v["alpha3"] < 0:
            good.append((t, iv, A, B, v))
    if not good:
        raise NoRootInInterval(f"no admissible alpha0 in ({fmt(b)}, {fmt(ai)})")
    if near is not None:
        good.sort(key=lambda g: abs(float(g[0]) - near))
    t, iv, A, B, v = good[0]
    r_ai = (ai * ai - t * t) / (to_fraction(m) * (t * t - b * b))
    rb0 = 0 if case == FIBRE_PLUS_SECTION and section == "beta0" else 1
    rbi = 0 if case == FIBRE_PLUS_SECTION and section == "beta_inf" else -1
    data = AnsatzBoundaryData(t, ai, -b, b, v["r_a0"], r_ai, Fraction(rb0), Fraction(rbi))
    okA, cA = _certify(A, t, ai, "A")
    okB, cB = _certify(B, -b, b, "B")
    cusps = ("alpha_inf",) + ((section,) if case == FIBRE_PLUS_SECTION else ())
    cert = (cA, cB, f"alpha0 isolated in [{fmt(iv[0])}, {fmt(iv[1])}]")
    return AmbitoricSolution(
        HYPERBOLIC, A, B, data, case=case, positive=okA and okB, certificate=cert, cusps=cusps
    )


def hyperbolic_identities(sol: AmbitoricSolution) -> tuple[Fraction, Fraction, Fraction]:
    """(a0+b0, a2+b2, a4+b4) with A = sum a_i z^(4-i)."""
    a = list(reversed(sol.A.coeffs + (Fraction(0),) * (5 - len(sol.A.coeffs))))
    bb = list(reversed(sol.B.coeffs + (Fraction(0),) * (5 - len(sol.B.coeffs))))
    return a[0] + bb[0], a[2] + bb[2], a[4] + bb[4]


def _hyper_chart_lines(d: AnsatzBoundaryData):
    """name -> (e, const) with chart label e . x_c + const."""
    out = {}
    for name, al, r in (("alpha0", d.alpha0, d.r_alpha0), ("alpha_inf", d.alpha_inf, d.r_alpha_inf)):
        out[name] = ((-al * al / r, 1 / r), -al / r)
    b = d.beta_inf
    out["beta0"] = ((-b * b, Fraction(1)), b)
    out["beta_inf"] = ((b * b, Fraction(-1)), b)
    return out


def _meet(l1, l2):
    (a, b), c = l1
    (p, q), r = l2
    det = a * q - b * p
    return ((-c * q + b * r) / det, (-a * r + p * c) / det)


def _hyper_roles(P: LabelledPolytope):
    """(case, section, roles) for a trapezoid with one cusp fibre, else None.

    Fibres are the non-parallel facets; roles maps chart facet names to facet indices.
    """
    if P.dimension != 2 or P.n_facets != 4:
        return None
    pairs = _opposite(P)
    par = [p for p in pairs if _parallel(P, *p)]
    if len(par) != 1:
        return None
    sec = par[0]
    fib = next(p for p in pairs if p != sec)
    F = P.facets
    # beta_inf is the section whose normal points along the sum of the fibre normals
    n = (F[fib[0]].normal[0] + F[fib[1]].normal[0], F[fib[0]].normal[1] + F[fib[1]].normal[1])
    s0 = sec[0] if n[0] * F[sec[0]].normal[0] + n[1] * F[sec[0]].normal[1] > 0 else sec[1]
    s1 = sec[1] if s0 == sec[0] else sec[0]
    cf = [k for k in fib if F[k].cusp]
    cs = [k for k in sec if F[k].cusp]
    if len(cf) != 1 or len(cs) > 1:
        return None
    other = fib[1] if cf[0] == fib[0] else fib[0]
    roles = {"alpha_inf": cf[0], "alpha0": other, "beta_inf": s0, "beta0": s1}
    if not cs:
        return FIBRE_ONLY, "beta_inf", roles
    return FIBRE_PLUS_SECTION, ("beta_inf" if cs[0] == s0 else "beta0"), roles


def _edge_length_ratio(lines):
    """Length ratio of the beta_inf edge to the beta0 edge."""
    def length(bn):
        p = _meet(lines[bn], lines["alpha0"])
        q = _meet(lines[bn], lines["alpha_inf"])
        return math.hypot(float(p[0] - q[0]), float(p[1] - q[1]))
    return length("beta_inf") / length("beta0")


def _P_edge_ratio(P, roles):
    V = P.vertices
    F = P.facets

    def edge(k):
        pts = [v for v in V if F[k].reference(v) == 0]
        return math.hypot(float(pts[0][0] - pts[1][0]), float(pts[0][1] - pts[1][1]))
    return edge(roles["beta_inf"]) / edge(roles["beta0"])


def _hyper_lattice_m(P, roles) -> Fraction:
    F = P.facets
    n0, n1, ns = F[roles["alpha0"]].normal, F[roles["alpha_inf"]].normal, F[roles["beta_inf"]].normal
    s = (n0[0] + n1[0], n0[1] + n1[1])
    k = 0 if ns[0] != 0 else 1
    m = Fraction(s[k], ns[k])
    if (s[0] - m * ns[0], s[1] - m * ns[1]) != (0, 0) or m <= 0:
        raise UnknownChart("fibre normals do not sum to a multiple of the section normal")
    return m


def hyperbolic_applicable(P: LabelledPolytope) -> Optional[str]:
    fr = _hyper_roles(P)
    return None if fr is None else fr[0]


def _float_lines(t, ai, m, b):
    r0 = (t * t - ai * ai) / (m * (ai * ai - b * b))
    ri = (ai * ai - t * t) / (m * (t * t - b * b))
    return {
        "alpha0": ((-t * t / r0, 1 / r0), -t / r0),
        "alpha_inf": ((-ai * ai / ri, 1 / ri), -ai / ri),
        "beta0": ((-b * b, 1.0), b),
        "beta_inf": ((b * b, -1.0), b),
    }


def _hyper_shape_solve(m: float, target: float, case: str, section: str, b: float = 1.0):
    """Float (alpha0, alpha_inf) with zero residual and parallel-edge ratio `target`."""

    def eqs(v):
        t, ai = v
        if not (b < t < ai):
            return [1e3, 1e3]
        vals = _hyper_values(t, ai, m, b, case, section)
        return [vals["residual"], _edge_length_ratio(_float_lines(t, ai, m, b)) - target]

    best = None
    for ai in np.geomspace(b * 1.01, b * 1e6, 240):
        ts = np.linspace(b, ai, 402)[1:-1]
        res = []
        for t in ts:
            v = _hyper_values(t, ai, m, b, case, section)
            res.append(v["residual"] if v["alpha3"] < 0 else np.nan)
        for k in range(len(ts) - 1):
            if np.isfinite(res[k]) and np.isfinite(res[k + 1]) and res[k] * res[k + 1] < 0:
                t = optimize.brentq(lambda s: _hyper_values(s, ai, m, b, case, section)["residual"], ts[k], ts[k + 1])
                gap = abs(_edge_length_ratio(_float_lines(t, ai, m, b)) - target)
                if best is None or gap < best[0]:
                    best = (gap, t, ai)
    if best is None:
        return None
    sol, info, _, _ = optimize.fsolve(eqs, [best[1], best[2]], full_output=True, xtol=1e-14)
    if max(abs(x) for x in info["fvec"]) > 1e-10:
        return None
    return float(sol[0]), float(sol[1])


def solve_hyperbolic_for(P: LabelledPolytope, b=1) -> AmbitoricSolution:
    """Fit the hyperbolic chart to a trapezoid with one cusp fibre (and optionally a section).

    (alpha0, alpha_inf) are fitted in floats so that the chart trapezoid has the same
    ratio of parallel edges as P; alpha_inf is then rationalized and the exact solve
    redone. The affine map and label scale are fitted and checked on every non-cusp facet.
    """
    fr = _hyper_roles(P)
    if fr is None:
        raise UnknownChart("no hyperbolic chart for this cusp configuration")
    case, section, roles = fr
    m = _hyper_lattice_m(P, roles)
    b = to_fraction(b)
    target = _P_edge_ratio(P, roles)
    guess = _hyper_shape_solve(float(m), target, case, section, float(b))
    if guess is None:
        raise NoRootInInterval("no hyperbolic chart matches the polytope shape")
    t, ai = guess
    sol = solve_hyperbolic(m, Fraction(ai).limit_denominator(10**12), case, b, section, near=t)
    chart = _fit_affine(P, roles, _hyper_chart_lines(sol.boundary))
    return AmbitoricSolution(
        HYPERBOLIC, sol.A, sol.B, sol.boundary, chart, case=case, positive=sol.positive,
        certificate=sol.certificate, cusps=sol.cusps,
    )


def _fit_affine(P, roles, lines) -> ChartMap:
    """Affine map sending P's vertices to the chart's and the label scale, in floats."""
    F = P.facets
    src, dst = [], []
    for fa, fb in (("alpha0", "beta0"), ("alpha0", "beta_inf"), ("alpha_inf", "beta0"), ("alpha_inf", "beta_inf")):
        v = next(v for v in P.vertices if F[roles[fa]].reference(v) == 0 and F[roles[fb]].reference(v) == 0)
        src.append([float(v[0]), float(v[1]), 1.0])
        w = _meet(lines[fa], lines[fb])
        dst.append([float(w[0]), float(w[1])])
    X, *_ = np.linalg.lstsq(np.array(src), np.array(dst), rcond=None)
    M = X[:2].T
    tau = X[2]
    cen = [float(c) for c in P.centroid]
    xc = M @ np.array(cen) + tau
    lams = []
    for name, k in roles.items():
        if F[k].cusp:
            continue
        e, c = lines[name]
        lc = float(e[0]) * xc[0] + float(e[1]) * xc[1] + float(c)
        lams.append(float(F[k].label(P.centroid)) / lc)
    if max(lams) - min(lams) > 1e-8 * max(abs(x) for x in lams):
        raise ConsistencyFailure(f"label scales disagree across facets: {lams}")
    names = {k: n for n, k in roles.items()}
    return ChartMap(
        tuple(tuple(float(v) for v in row) for row in M),
        tuple(float(v) for v in tau),
        float(np.mean(lams)),
        tuple(names[k] for k in range(4)),
    )


# ---------------------------------------------------------------- Bryant


def bryant_solution(a1, a2) -> AmbitoricSolution:
    """Bryant potential on the standard simplex with the cusp on 1 - x1 - x2 = 0."""
    a1, a2 = to_fraction(a1), to_fraction(a2)
    if a1 <= 0 or a2 <= 0:
        raise NotSimplexNormalized("simplex labels must be positive")
    data = AnsatzBoundaryData(Fraction(0), Fraction(1), Fraction(0), Fraction(1), a1, Fraction(0), a2, Fraction(0))
    return AmbitoricSolution(BRYANT, None, None, data, labels=(a1, a2), cusps=("diagonal",))


def bryant_for(P: LabelledPolytope) -> AmbitoricSolution:
    """Bryant solution carried to a triangle with exactly one cusp edge."""
    if P.dimension != 2 or P.n_facets != 3:
        raise NotTriangle("Bryant solution needs a triangle")
    if len(P.cusp_facets) != 1:
        raise NotSimplexNormalized("Bryant solution needs exactly one cusp edge")
    k = P.cusp_facets[0]
    i, j = [x for x in range(3) if x != k]
    F = P.facets

    def opp(f):
        return next(F[f].reference(v) for v in P.vertices if F[f].reference(v) != 0)
    hi, hj = opp(i), opp(j)
    M = (tuple(Fraction(c) / hi for c in F[i].normal), tuple(Fraction(c) / hj for c in F[j].normal))
    tau = (F[i].offset / hi, F[j].offset / hj)
    names = {i: "x1", j: "x2", k: "diagonal"}
    sol = bryant_solution(hi / F[i].weight, hj / F[j].weight)
    return AmbitoricSolution(
        BRYANT, None, None, sol.boundary, ChartMap(M, tau, 1, tuple(names[x] for x in range(3))),
        labels=sol.labels, cusps=sol.cusps,
    )


def _bryant_hess(a1, a2, x1, x2):
    D = 1 - x1 - x2
    S = a1 * x1 + a2 * x2
    h11 = (a1 / x1 + 2 * a1 / D + S / D**2) / 2
    h12 = ((a1 + a2) / D + S / D**2) / 2
    h22 = (a2 / x2 + 2 * a2 / D + S / D**2) / 2
    return h11, h12, h22


# ---------------------------------------------------------------- evaluation


def _exact(x) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in x)


def chart_H(sol: AmbitoricSolution, xc):
    """Inverse Hessian in the chart coordinates."""
    x1, x2 = xc
    if sol.kind == PRODUCT:
        return ((sol.A(x1), 0 * x1), (0 * x1, sol.B(x2)))
    if sol.kind == CALABI:
        x, y = x1, x2 / x1
        A, B = sol.A(x), sol.B(y)
        return ((A / x, y * A / x), (y * A / x, (x * x * B + y * y * A) / x))
    if sol.kind == HYPERBOLIC:
        x, y = hyperbolic_xy(x1, x2)
        A, B = sol.A(x), sol.B(y)
        den = (x - y) * (x + y) ** 3
        h12 = (A * y * y + B * x * x) / den
        return (((A + B) / den, h12), (h12, (A * y**4 + B * x**4) / den))
    if sol.kind == BRYANT:
        a1, a2 = sol.labels
        if not _exact(xc):
            a1, a2 = float(a1), float(a2)
        h11, h12, h22 = _bryant_hess(a1, a2, x1, x2)
        det = h11 * h22 - h12 * h12
        return ((h22 / det, -h12 / det), (-h12 / det, h11 / det))
    raise UnknownChart(sol.kind)


def hyperbolic_xy(x1, x2):
    """Roots x > y of z^2 + z/x1 - x2/x1 = 0."""
    x1, x2 = float(x1), float(x2)
    p = 1 / x1
    disc = p * p + 4 * x2 / x1
    if disc <= 0:
        raise OutsideDomain("point outside the hyperbolic chart")
    r = math.sqrt(disc)
    return (-p + r) / 2, (-p - r) / 2


def _chart_point(sol, point):
    if not _exact(point) or not _exact(sol.chart.tau):
        point = tuple(float(v) for v in point)
    else:
        point = tuple(to_fraction(v) for v in point)
    return sol.chart.to_chart(point)


def _inside_chart(sol, xc) -> bool:
    d = sol.boundary
    x1, x2 = xc
    if sol.kind == PRODUCT:
        return d.alpha0 < x1 < d.alpha_inf and d.beta0 < x2 < d.beta_inf
    if sol.kind == CALABI:
        return d.alpha0 < x1 < d.alpha_inf and d.beta0 < x2 / x1 < d.beta_inf
    if sol.kind == BRYANT:
        return x1 > 0 and x2 > 0 and x1 + x2 < 1
    try:
        x, y = hyperbolic_xy(x1, x2)
    except (OutsideDomain, ZeroDivisionError):
        return False
    return float(d.alpha0) < x < float(d.alpha_inf) and float(d.beta0) < y < float(d.beta_inf)


def evaluate_H(sol: AmbitoricSolution, point):
    """H on the input polytope at an interior point (exact for rational charts and points)."""
    xc = _chart_point(sol, point)
    if not _inside_chart(sol, xc):
        raise OutsideDomain(f"point {tuple(map(float, point))} is not interior")
    return sol.chart.pull_back_H(chart_H(sol, xc))


def chart_scalar_curvature(sol: AmbitoricSolution, xc):
    """Closed-form scalar curvature in chart coordinates."""
    x1, x2 = xc
    if sol.kind == PRODUCT:
        return -(sol.A.deriv(2)(x1) + sol.B.deriv(2)(x2))
    if sol.kind == CALABI:
        return -(sol.A.deriv(2)(x1) + sol.B.deriv(2)(x2 / x1)) / x1
    if sol.kind == HYPERBOLIC:
        a = list(reversed(sol.A.coeffs + (Fraction(0),) * (5 - len(sol.A.coeffs))))
        bb = list(reversed(sol.B.coeffs + (Fraction(0),) * (5 - len(sol.B.coeffs))))
        return 6 * float(a[3] - bb[3]) * x1 + 6 * float(a[1] - bb[1]) * x2
    raise UnknownChart(f"no closed-form scalar curvature for {sol.kind}")


def closed_form_scalar(sol: AmbitoricSolution, point):
    xc = _chart_point(sol, point)
    lam = sol.chart.lam
    return chart_scalar_curvature(sol, xc) / lam


# ---------------------------------------------------------------- potentials


def _double_antiderivative(f, x0: float, x: float) -> float:
    """int_{x0}^{x} (x - t) f(t) dt."""
    val, _ = integrate.quad(lambda t: (x - t) * f(t), x0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def _fA(p: UniPoly):
    cs = [float(c) for c in p.coeffs]
    return lambda t: 1.0 / np.polynomial.polynomial.polyval(t, cs)


def chart_potential(sol: AmbitoricSolution, xc) -> float:
    x1, x2 = float(xc[0]), float(xc[1])
    d = sol.boundary
    if sol.kind == PRODUCT:
        xa = (float(d.alpha0) + float(d.alpha_inf)) / 2
        yb = (float(d.beta0) + float(d.beta_inf)) / 2
        return _double_antiderivative(_fA(sol.A), xa, x1) + _double_antiderivative(_fA(sol.B), yb, x2)
    if sol.kind == CALABI:
        x, y = x1, x2 / x1
        xa = (float(d.alpha0) + float(d.alpha_inf)) / 2
        yb = (float(d.beta0) + float(d.beta_inf)) / 2
        iA = _fA(sol.A)
        return x * _double_antiderivative(_fA(sol.B), yb, y) + _double_antiderivative(
            lambda t: t * iA(t), xa, x
        )
    if sol.kind == HYPERBOLIC:
        x, y = hyperbolic_xy(x1, x2)
        xa = (float(d.alpha0) + float(d.alpha_inf)) / 2
        yb = (float(d.beta0) + float(d.beta_inf)) / 2
        iA, iB = _fA(sol.A), _fA(sol.B)

        def F(inv, c, z):
            val, _ = integrate.quad(lambda t: (t - x) * (t - y) * inv(t), c, z,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)
            return val
        return (-F(iA, xa, x) + F(iB, yb, y)) / (x + y)
    if sol.kind == BRYANT:
        a1, a2 = (float(v) for v in sol.labels)
        D = 1 - x1 - x2
        return 0.5 * (a1 * x1 * math.log(x1) + a2 * x2 * math.log(x2) - (a1 * x1 + a2 * x2) * math.log(D))
    raise UnknownChart(sol.kind)


def symplectic_potential(sol: AmbitoricSolution, point) -> float:
    """Potential on the input polytope, up to an affine function."""
    xc = _chart_point(sol, point)
    if not _inside_chart(sol, xc):
        raise OutsideDomain("point is not interior")
    return float(sol.chart.lam) * chart_potential(sol, xc)


def construct_for(P: LabelledPolytope) -> Optional[AmbitoricSolution]:
    """The explicit solution matching P's shape and cusp set, if one applies."""
    if P.dimension != 2:
        return None
    if P.n_facets == 3 and len(P.cusp_facets) == 1:
        return bryant_for(P)
    if P.n_facets != 4:
        return None
    if is_parallelogram(P):
        return solve_product(P)
    if calabi_applicable(P):
        return solve_calabi_for(P)
    if hyperbolic_applicable(P):
        return solve_hyperbolic_for(P)
    return None
