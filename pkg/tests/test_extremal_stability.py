"""Extremal affine functions, the functional L and stability verdicts."""

from fractions import Fraction as F

import pytest

from torex.errors import DegenerateCrease
from torex.extremal import (
    APPENDIX,
    MAIN,
    CreaseFunction,
    affine_basis_functions,
    df_invariant,
    extremal_affine,
    normal_cone_family,
    simple_crease,
    szekelyhidi_constraint,
)
from torex.polynomial import AffineFunction, UniPoly
from torex.polytope import IntervalProblem
from torex.presets import hirzebruch, hirzebruch_qk, simplex, square
from torex.stability import (
    SEMISTABLE,
    STABLE,
    UNDECIDED,
    UNSTABLE,
    corner_determinant,
    crease_scan,
    interval_profile,
    interval_stability,
    stability,
)

POLYGONS = [
    simplex().polytope,
    simplex().with_cusps(["x1"]),
    square().with_cusps(["left", "bottom"]),
    hirzebruch(1, 2).polytope,
    hirzebruch(2, F(7, 2)).with_cusps(["fibre"]),
    hirzebruch_qk(3, 1).with_cusps(["l2", "l3"]),
]


class TestExtremal:
    @pytest.mark.parametrize("P", POLYGONS)
    def test_affine_functions_are_annihilated(self, P):
        for f in affine_basis_functions(2):
            assert df_invariant(P, f) == 0
        assert df_invariant(P, AffineFunction((F(2, 3), -5), F(1, 7))) == 0

    @pytest.mark.parametrize("P", POLYGONS)
    def test_appendix_is_half_main(self, P):
        assert extremal_affine(P, APPENDIX) == extremal_affine(P, MAIN).scale(F(1, 2))

    def test_simplex_is_constant(self):
        # perimeter 3, area 1/2, so s = 2 * 3 / (1/2)
        assert extremal_affine(simplex().polytope) == AffineFunction((0, 0), 12)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            extremal_affine(square().polytope, "other")

    def test_interval(self):
        I = IntervalProblem(2, (0, 1))
        prof = interval_profile(I)
        assert prof == UniPoly([0, 0, F(1, 2), F(-1, 4)])
        assert prof(2) == 0  # c = length gives an affine function

    def test_crease_not_meeting_interior_is_affine(self):
        P = square().polytope
        f = CreaseFunction(AffineFunction((1, 0), 3))
        assert f.is_affine_on(P) and df_invariant(P, f) == 0

    def test_degenerate_crease(self):
        P = square().polytope
        with pytest.raises(DegenerateCrease):
            simple_crease(P, (0, 0), F(1, 2), F(1, 2))


class TestNormalConeFamily:
    @pytest.mark.parametrize("P, i", [
        (simplex().with_cusps(["x1"]), 0),
        (hirzebruch(2, 3).with_cusps(["fibre"]), 2),
        (hirzebruch_qk(3, 1).with_cusps(["l2", "l3"]), 1),
    ])
    def test_continuous_and_vanishing_at_ends(self, P, i):
        fam = normal_cone_family(P, i)
        assert all(d == 0 for d in fam.continuity_defects())
        assert fam(0) == 0 and fam(fam.c_max) == 0
        assert fam.max_degree() <= 4

    @pytest.mark.parametrize("P, i", [
        (simplex().with_cusps(["x1"]), 0),
        (hirzebruch(1, 2).with_cusps(["s-infinity"]), 1),
        (hirzebruch(2, 3).with_cusps(["fibre"]), 2),
    ])
    def test_second_derivative_is_szekelyhidi(self, P, i):
        fam = normal_cone_family(P, i)
        assert fam.pieces[0].deriv(2)(0) == szekelyhidi_constraint(P, i)

    def test_simplex_profile(self):
        fam = normal_cone_family(simplex().with_cusps(["x1"]), 0)
        assert fam.pieces == (UniPoly([0, 0, 1, -2, 1]),)


class TestStability:
    @pytest.mark.parametrize("cusps, status", [
        ([], STABLE),
        (["x1"], STABLE),
        (["x1", "x2"], UNSTABLE),
        (["x1", "x2", "diagonal"], UNSTABLE),
    ])
    def test_simplex(self, cusps, status):
        assert stability(simplex().with_cusps(cusps)).status == status

    @pytest.mark.parametrize("cusps, status", [
        ([], STABLE),
        (["left"], STABLE),
        (["left", "bottom"], STABLE),
        (["left", "right"], SEMISTABLE),
        (["left", "right", "bottom"], UNSTABLE),
    ])
    def test_square(self, cusps, status):
        assert stability(square().with_cusps(cusps)).status == status

    def test_witness_is_checked(self):
        P = simplex().with_cusps(["x1", "x2"])
        v = stability(P)
        assert not v.witness.is_affine_on(P)
        assert df_invariant(P, v.witness) == v.witness_value <= 0

    def test_semistable_witness_vanishes(self):
        P = square().with_cusps(["left", "right"])
        v = stability(P)
        assert v.witness_value == 0 and df_invariant(P, v.witness) == 0

    def test_hirzebruch_compact(self):
        assert stability(hirzebruch(1, 2).polytope).status == STABLE
        assert stability(hirzebruch(2, 3).with_cusps(["s-infinity"])).status == STABLE

    @pytest.mark.parametrize("masses, status", [
        ((0, 1), STABLE), ((1, 1), STABLE), ((0, 0), UNSTABLE),
    ])
    def test_interval(self, masses, status):
        assert interval_stability(IntervalProblem(1, masses)).status == status

    def test_scan_on_stable_square(self):
        res = crease_scan(square().with_cusps(["left"]), 12, 1)
        assert res.verdict.status == UNDECIDED and res.minimum > 0

    def test_opposite_determinant_zero_iff_equal(self):
        det_equal = corner_determinant(hirzebruch_qk(2, 2).with_cusps(["l2", "l4"]), 3)[2]
        det_other = corner_determinant(hirzebruch_qk(3, 1).with_cusps(["l2", "l4"]), 3)[2]
        assert det_equal == 0 and det_other > 0

    @pytest.mark.parametrize("q, k", [(2, 1), (3, 1), (F(7, 2), F(3, 2))])
    def test_adjacent_determinants_positive(self, q, k):
        P = hirzebruch_qk(q, k).with_cusps(["l2", "l3"])
        assert corner_determinant(P, 1)[2] > 0 and corner_determinant(P, 2)[2] > 0
