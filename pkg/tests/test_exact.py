"""Exact rationals and polynomials."""

from fractions import Fraction as F

import pytest

from torex.errors import MalformedDocument
from torex.polynomial import (
    AffineFunction,
    MultiPoly,
    UniPoly,
    count_roots,
    isolate_roots,
    lagrange_interpolate,
    positive_on,
    refine_root,
)
from torex.rational import fmt, parse_rational, to_fraction


class TestRational:
    def test_parse_and_format_roundtrip(self):
        for text in ("0", "-3", "7/2", "-5/12"):
            assert fmt(parse_rational(text)) == text

    def test_parse_normalizes(self):
        assert parse_rational("4/6") == F(2, 3)
        assert parse_rational(" 3 / 9 ") == F(1, 3)

    @pytest.mark.parametrize("bad", ["1.5", "abc", "", "1/0", True, 1.5, None, "2/3/4"])
    def test_parse_rejects(self, bad):
        with pytest.raises(MalformedDocument):
            parse_rational(bad)

    def test_floats_rejected_where_exactness_needed(self):
        with pytest.raises(TypeError):
            to_fraction(0.5)
        with pytest.raises(TypeError):
            to_fraction(True)


class TestUniPoly:
    def test_arithmetic(self):
        p = UniPoly([1, 2])  # 1 + 2x
        q = UniPoly([-1, 0, 1])  # x^2 - 1
        assert (p * q).coeffs == (-1, -2, 1, 2)
        assert (p + q).coeffs == (0, 2, 1)
        assert (q - q).is_zero()
        assert (p**2)(F(1, 2)) == 4

    def test_division_and_gcd(self):
        a = UniPoly.from_roots([1, 2, 2])
        b = UniPoly.from_roots([2, 3])
        quo, rem = a.divmod(b)
        assert quo * b + rem == a
        assert a.gcd(b).coeffs == UniPoly.from_roots([2]).coeffs

    def test_root_multiplicity_and_squarefree(self):
        p = UniPoly.from_roots([F(1, 3), F(1, 3), 2, 5, 5, 5])
        assert p.root_multiplicity(F(1, 3)) == 2
        assert p.root_multiplicity(5) == 3
        assert p.root_multiplicity(0) == 0
        assert p.squarefree().degree == 3

    def test_derivative_and_compose(self):
        p = UniPoly([0, 0, 0, 1])
        assert p.deriv().coeffs == (0, 0, 3)
        assert p.deriv(3).coeffs == (6,)
        shifted = p.compose(UniPoly([1, 1]))  # (x + 1)^3
        assert shifted.coeffs == (1, 3, 3, 1)

    def test_float_evaluation(self):
        assert UniPoly([1, F(1, 2)])(2.0) == pytest.approx(2.0)


class TestSturm:
    def test_count_open_interval(self):
        p = UniPoly.from_roots([1, 2, 3])
        assert count_roots(p, 0, F(5, 2)) == 2
        assert count_roots(p, 1, 3) == 1  # endpoints excluded
        assert count_roots(p, 4, 9) == 0

    def test_irrational_roots(self):
        p = UniPoly([-2, 0, 1])  # +- sqrt 2
        ivs = isolate_roots(p, -10, 10)
        assert len(ivs) == 2
        lo, hi = refine_root(p, ivs[1], F(1, 10**20))
        assert lo**2 <= 2 <= hi**2 and hi - lo <= F(1, 10**20)

    def test_midpoint_roots_are_degenerate(self):
        p = UniPoly.from_roots([2, F(7, 2)])
        ivs = isolate_roots(p, 0, 4)
        assert (F(2), F(2)) in ivs
        assert all(count_roots(p, lo, hi) == 1 for lo, hi in ivs if lo != hi)

    def test_positivity(self):
        assert positive_on(UniPoly([1, 0, 1]), -5, 5)
        assert not positive_on(UniPoly.from_roots([1, 3], -1), 0, 4)
        # double root in the interior is not positive there
        assert not positive_on(UniPoly.from_roots([2, 2]), 0, 4)
        # roots at the endpoints are allowed
        assert positive_on(UniPoly.from_roots([0, 4], -1), 0, 4)

    def test_zero_polynomial(self):
        with pytest.raises(ValueError):
            count_roots(UniPoly(), 0, 1)


def test_lagrange_recovers_polynomial():
    p = UniPoly([F(1, 7), -2, 0, 3, F(-5, 2)])
    nodes = [F(k, 3) for k in range(5)]
    assert lagrange_interpolate(nodes, [p(x) for x in nodes]) == p


class TestMultiPoly:
    def test_evaluation_and_products(self):
        x, y = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
        f = x * x - 3 * x * y + 1
        assert f(F(1, 2), 2) == F(1, 4) - 3 + 1
        assert f.degree == 2
        assert (f - f).is_zero()

    def test_compose_affine(self):
        x, y = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
        f = x * y + y
        M, t = ((1, 1), (0, 1)), (F(1, 2), -1)
        g = f.compose_affine(M, t)
        for p in ((0, 0), (1, 2), (F(-3, 4), F(5, 3))):
            image = (p[0] + p[1] + t[0], p[1] + t[1])
            assert g(*p) == f(*image)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            MultiPoly.from_dict(2, {(1,): 1})


def test_affine_function():
    g = AffineFunction((1, F(-1, 2)), 3)
    h = AffineFunction((0, 1), -1)
    assert (g + h)(2, 2) == g(2, 2) + h(2, 2)
    assert (g - g).is_zero()
    assert g.scale(2)(1, 0) == 8
    assert g.to_multipoly()(F(1, 3), 4) == g(F(1, 3), 4)
