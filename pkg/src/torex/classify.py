"""Decision pipeline for (polytope, cusp set) pairs: stability, facet conditions,
Poincare parameters and the final verdict, with constructions attached where an
explicit ansatz applies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .ambitoric import AmbitoricSolution, construct_for
from .errors import AlphaPole, NoAdmissibleNormalization, NonPositiveAlpha, TorexError
from .extremal import MAIN, extremal_affine, restrict_to_facet, szekelyhidi_constraint
from .polytope import LabelledPolytope, facet_subproblem
from .rational import fmt
from .stability import (
    SEMISTABLE,
    STABLE,
    UNDECIDED,
    UNSTABLE,
    StabilityVerdict,
    interval_stability,
    stability,
)

UNSTABLE_FINAL = "Unstable"
DONALDSON_ONLY = "DonaldsonOnly"
POINCARE_EXTREMAL = "PoincareExtremal"
SEMISTABLE_BOUNDARY = "SemistableBoundary"
UNDECIDED_FINAL = "Undecided"

# numeric cross-check thresholds (loose: they guard against wiring errors, not truncation)
RESIDUAL_GUARD = 1e-3


@dataclass(frozen=True)
class ConditionIII:
    constant: bool
    value: Optional[Fraction]
    positive: bool

    def to_document(self) -> dict:
        return {
            "constant": self.constant,
            "value": None if self.value is None else fmt(self.value),
            "positive": self.positive,
        }


@dataclass(frozen=True)
class PoincareParams:
    alpha: Fraction
    beta: Optional[Fraction]

    def to_document(self) -> dict:
        return {"alpha": fmt(self.alpha), "beta": None if self.beta is None else fmt(self.beta)}


@dataclass(frozen=True)
class FacetReport:
    facet: int
    condition_ii: StabilityVerdict
    condition_iii: ConditionIII
    szekelyhidi: Fraction
    params: Optional[PoincareParams] = None
    notes: tuple = ()


@dataclass
class ClassificationReport:
    condition_i: StabilityVerdict
    facets: list
    final: str
    construction: Optional[AmbitoricSolution] = None
    residual: object = None
    boundary: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    inconsistencies: list = field(default_factory=list)


def condition_iii(P: LabelledPolytope, i: int) -> ConditionIII:
    """Compare the facet's own extremal function with the restriction of s to it."""
    sF = extremal_affine(facet_subproblem(P, i), MAIN)
    sr = restrict_to_facet(extremal_affine(P, MAIN), P, i)
    if sF.coefficients[0] != sr.coefficients[0]:
        return ConditionIII(False, None, False)
    c = sF.constant - sr.constant
    return ConditionIII(True, c, c > 0)


def alpha_from_integral(P: LabelledPolytope, i: int) -> Fraction:
    """alpha with 2/alpha the nu-average of s_F - s over the facet."""
    I = facet_subproblem(P, i)
    diff = extremal_affine(I, MAIN) - restrict_to_facet(extremal_affine(P, MAIN), P, i)
    mean = diff.coefficients[0] * I.length / 2 + diff.constant
    if mean <= 0:
        raise NonPositiveAlpha(f"facet {i}: mean of s_F - s is {fmt(mean)}")
    return 2 / mean


def remark_normal_form(P: LabelledPolytope, i: int):
    """(a0, a1, a2, ell, lam) in coordinates where F_i = {x1 = 0}, a neighbour is {x2 = 0}
    and the other neighbour is {ell - x2 - lam x1 = 0}; s = a0 + a1 x1 + a2 x2."""
    if P.dimension != 2:
        raise NoAdmissibleNormalization("needs a polygon")
    fi = P.facets[i]
    s = extremal_affine(P, MAIN)
    for j0, j1 in (P.adjacent(i), tuple(reversed(P.adjacent(i)))):
        fj = P.facets[j0]
        (a, b), (c, d) = fi.normal, fj.normal
        det = a * d - b * c
        if det not in (1, -1):
            continue
        # x' = (ref_i(x), ref_j0(x)); x = M^{-1}(x' - t)
        v = next(x for x in P.vertices if fi.reference(x) == 0 and fj.reference(x) == 0)
        w = next(x for x in P.vertices if fi.reference(x) == 0 and P.facets[j1].reference(x) == 0)
        ell = fj.reference(w)
        inv = ((Fraction(d, det), Fraction(-b, det)), (Fraction(-c, det), Fraction(a, det)))
        g = s.coefficients
        a1 = g[0] * inv[0][0] + g[1] * inv[1][0]
        a2 = g[0] * inv[0][1] + g[1] * inv[1][1]
        a0 = s(*v)
        n1 = P.facets[j1].normal
        # n' = M^{-T} n
        p = inv[0][0] * n1[0] + inv[1][0] * n1[1]
        q = inv[0][1] * n1[0] + inv[1][1] * n1[1]
        if q >= 0 or ell <= 0:
            continue
        return a0, a1, a2, ell, p / q
    raise NoAdmissibleNormalization(f"facet {i}: no unimodular normal form")


def alpha_beta_from_remark(P: LabelledPolytope, i: int) -> tuple[Fraction, Fraction]:
    a0, a1, _, ell, lam = remark_normal_form(P, i)
    if a0 * ell == 4:
        raise AlphaPole(f"facet {i}: a0 * ell = 4")
    alpha = 2 * ell / (4 - a0 * ell)
    beta = alpha**2 / 6 * (a1 + 2 * lam * a0 / ell - 12 * lam / ell**2)
    return alpha, beta


def beta_from_remark(P: LabelledPolytope, i: int) -> Fraction:
    return alpha_beta_from_remark(P, i)[1]


def _facet_report(P: LabelledPolytope, i: int) -> FacetReport:
    c2 = interval_stability(facet_subproblem(P, i))
    c3 = condition_iii(P, i)
    sz = szekelyhidi_constraint(P, i)
    params, notes = None, []
    if c3.constant and c3.positive:
        alpha = alpha_from_integral(P, i)
        beta = None
        try:
            ar, beta = alpha_beta_from_remark(P, i)
            if ar != alpha:
                notes.append(f"remark alpha {fmt(ar)} differs from integral alpha {fmt(alpha)}")
        except (NoAdmissibleNormalization, AlphaPole) as e:
            notes.append(str(e))
        params = PoincareParams(alpha, beta)
    return FacetReport(i, c2, c3, sz, params, tuple(notes))


def _final(cond_i: StabilityVerdict, facets: list) -> str:
    if cond_i.status == UNSTABLE:
        return UNSTABLE_FINAL
    if cond_i.status == SEMISTABLE:
        # an exact zero on a non-affine crease destabilizes in the relative sense
        return UNSTABLE_FINAL if cond_i.witness is not None else SEMISTABLE_BOUNDARY
    if cond_i.status != STABLE:
        return UNDECIDED_FINAL
    ok = all(
        f.condition_ii.status == STABLE and f.condition_iii.constant and f.condition_iii.positive
        for f in facets
    )
    return POINCARE_EXTREMAL if ok else DONALDSON_ONLY


def classify_pair(P: LabelledPolytope, construct: bool = True, verify: bool = True,
                  grid_n: int = 10, h: float = 1e-3) -> ClassificationReport:
    """Full pipeline: condition (i), per-cusp (ii) and (iii), verdict, construction."""
    cond_i = stability(P)
    facets = [_facet_report(P, i) for i in P.cusp_facets] if P.dimension == 2 else []
    final = _final(cond_i, facets)
    rep = ClassificationReport(cond_i, facets, final)
    if P.dimension == 2 and not P.cusp_facets:
        rep.metadata["cusp_facets"] = "none: the verdict concerns a compact extremal metric"
    if final in (POINCARE_EXTREMAL, DONALDSON_ONLY):
        rep.metadata["poincare_claim"] = (
            "proved for these ansaetze" if P.n_facets in (3, 4) else "conjectural"
        )
    if not construct or cond_i.status != STABLE:
        return rep
    try:
        sol = construct_for(P)
    except TorexError as e:
        sol = None
        rep.metadata["construction_error"] = f"{type(e).__name__}: {e}"
    if sol is None:
        rep.metadata["construction"] = "StableNoConstruction"
        return rep
    rep.construction = sol
    if verify:
        _verify(P, rep, grid_n, h)
    return rep


def _verify(P: LabelledPolytope, rep: ClassificationReport, grid_n: int, h: float) -> None:
    from .verify import NON_POINCARE, POINCARE, REGULAR, abreu_residual, boundary_report

    sol = rep.construction
    rep.residual = abreu_residual(sol, P, grid_n, h)
    if rep.residual.max_abs_residual > RESIDUAL_GUARD:
        rep.inconsistencies.append(f"Abreu residual {rep.residual.max_abs_residual:.3e}")
    for j in range(P.n_facets):
        fit = boundary_report(sol, P, j)
        rep.boundary.append(fit)
        if not fit.agrees:
            rep.inconsistencies.append(
                f"facet {j}: numeric {fit.classification} vs symbolic {fit.symbolic}"
            )
        expected_cusp = POINCARE if rep.final == POINCARE_EXTREMAL else NON_POINCARE
        if P.facets[j].cusp and fit.classification != expected_cusp and sol.kind != "Bryant":
            rep.inconsistencies.append(f"facet {j}: {fit.classification} under {rep.final}")
        if not P.facets[j].cusp and fit.classification != REGULAR:
            rep.inconsistencies.append(f"facet {j}: regular facet classified {fit.classification}")
