from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from toricsig.qseries import (
    BivariateSeries,
    LaurentFraction,
    LaurentPolynomial,
    NotInvertibleError,
    OrderMismatchError,
    PoleError,
    TruncatedSeries,
    expand_inv_one_plus_qk,
    format_rational,
    parse_rational,
)

q = sympy.symbols("q")

ORDER = 5
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
series = st.lists(rationals, min_size=ORDER + 1, max_size=ORDER + 1).map(
    lambda cs: TruncatedSeries.from_coeffs(cs, ORDER)
)
units = series.filter(lambda s: s[0] != 0)


def ts(*cs, order=None):
    return TruncatedSeries.from_coeffs(cs, len(cs) - 1 if order is None else order)


def sympy_coeffs(expr, order):
    """Taylor coefficients of a sympy expression in q, used as an oracle."""
    poly = sympy.series(expr, q, 0, order + 1).removeO()
    return [Fraction(str(sympy.Rational(poly.coeff(q, i)))) for i in range(order + 1)]


def lp(d):
    return LaurentPolynomial.from_dict(d)


class TestRationalText:
    def test_round_trip(self):
        for c in (Fraction(0), Fraction(-7, 3), Fraction(12)):
            assert parse_rational(format_rational(c)) == c

    def test_integer_has_no_slash(self):
        assert format_rational(Fraction(4, 2)) == "2"


class TestTruncatedSeries:
    def test_difference_of_squares(self):
        assert ts(1, 1, 0) * ts(1, -1, 0) == ts(1, 0, -1)

    def test_additive_identity(self):
        s = ts(3, 1, 4)
        assert s + TruncatedSeries.zero(2) == s

    def test_self_subtraction(self):
        s = ts(1, 2, 3)
        assert (s - s).is_zero()

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatchError):
            ts(1, 2) + ts(1, 2, 3)

    def test_geometric_inverse(self):
        assert ts(1, -1, 0, 0, 0).invert() == ts(1, 1, 1, 1, 1)

    def test_constant_inverse(self):
        assert TruncatedSeries.constant(2, 3).invert() == TruncatedSeries.constant(Fraction(1, 2), 3)

    def test_inverse_by_hand(self):
        # b0 = 1/2, b1 = -8*b0/2, b2 = -(8*b1 + 24*b0)/2
        assert ts(2, 8, 24).invert() == ts(Fraction(1, 2), -2, 2)

    def test_inverse_against_sympy(self):
        expected = sympy_coeffs(1 / (2 + 8 * q + 24 * q**2), 2)
        assert list(ts(2, 8, 24).invert().coeffs) == expected

    def test_not_invertible(self):
        with pytest.raises(NotInvertibleError):
            ts(0, 1, 1).invert()

    def test_powers(self):
        assert ts(1, 1, 0) ** 2 == ts(1, 2, 1)
        assert ts(5, 1, 2) ** 0 == TruncatedSeries.one(2)
        assert ts(2, 8, 24) ** 2 == ts(4, 32, 160)

    def test_negative_power(self):
        s = ts(2, 8, 24)
        assert s ** -2 == (s**2).invert()

    def test_scalar_ops(self):
        s = ts(1, 2, 3)
        assert s * Fraction(1, 2) == ts(Fraction(1, 2), 1, Fraction(3, 2))
        assert s + 1 == ts(2, 2, 3)
        assert 1 - s == ts(0, -2, -3)

    def test_valuation(self):
        assert ts(0, 0, 5).valuation() == 2
        assert TruncatedSeries.zero(3).valuation() == float("inf")

    def test_truncate(self):
        assert ts(1, 2, 3, 4).truncate(1) == ts(1, 2)

    def test_json_round_trip(self):
        s = ts(Fraction(1, 4), -6, 0)
        assert s.to_json() == ["1/4", "-6", "0"]
        assert TruncatedSeries.from_json(s.to_json()) == s

    def test_str(self):
        assert str(ts(1, 32)) == "1 + 32*q + O(q^2)"
        assert str(ts(Fraction(1, 16), -1, 7)) == "1/16 - q + 7*q^2 + O(q^3)"

    @settings(max_examples=60, deadline=None)
    @given(series, series, series)
    def test_ring_axioms(self, a, b, c):
        assert a + b == b + a
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c

    @settings(max_examples=60, deadline=None)
    @given(units)
    def test_invert_times_self(self, a):
        assert a * a.invert() == TruncatedSeries.one(ORDER)

    @settings(max_examples=30, deadline=None)
    @given(units, st.integers(min_value=-3, max_value=4))
    def test_power_law(self, a, k):
        assert a**k * a == a ** (k + 1)


class TestExpandInvOnePlusQk:
    def test_examples(self):
        assert expand_inv_one_plus_qk(2, 5) == ts(1, 0, -1, 0, 1, 0)
        assert expand_inv_one_plus_qk(0, 3) == TruncatedSeries.constant(Fraction(1, 2), 3)
        assert expand_inv_one_plus_qk(-1, 3) == ts(0, 1, -1, 1)

    @pytest.mark.parametrize("k", [-4, -1, 1, 3, 7])
    def test_times_one_plus_qk_is_one(self, k):
        n = 8
        inv = expand_inv_one_plus_qk(k, n)
        one_plus = TruncatedSeries.one(n) + TruncatedSeries.monomial(abs(k), n)
        if k > 0:
            assert inv * one_plus == TruncatedSeries.one(n)
        else:
            # q^|k| / (1 + q^|k|)
            assert inv * one_plus == TruncatedSeries.monomial(abs(k), n)


class TestLaurentPolynomial:
    def test_drops_zero_terms(self):
        assert lp({0: 1, 3: 0}).terms == ((0, 1),)

    def test_arith(self):
        a = lp({-1: 1, 0: 2})
        b = lp({1: 1})
        assert a * b == lp({0: 1, 1: 2})
        assert (a - a).is_zero()
        assert a.low() == -1 and a.high() == 0

    def test_one_plus_qk(self):
        assert LaurentPolynomial.one_plus_qk(0) == LaurentPolynomial.constant(2)
        assert LaurentPolynomial.one_plus_qk(-2) == lp({0: 1, -2: 1})

    def test_content_and_exact_div(self):
        p = lp({0: 4, 2: 6})
        assert p.content() == 2
        assert p.exact_div(2) == lp({0: 2, 2: 3})


class TestLaurentFraction:
    inv1 = LaurentFraction.inv_one_plus_qk(1)

    def test_p1_collapse(self):
        q_over = LaurentFraction(lp({1: 1}), lp({0: 1, 1: 1}))
        assert self.inv1 + q_over == LaurentFraction.constant(1)

    def test_multiplicative_identity(self):
        assert self.inv1 * LaurentFraction.constant(1) == self.inv1

    def test_inverse_exponent_canonical(self):
        for k in (1, 3):
            total = LaurentFraction.inv_one_plus_qk(k) + LaurentFraction.inv_one_plus_qk(-k) - 1
            assert total.is_zero()

    def test_order(self):
        f = LaurentFraction(lp({1: 1}), lp({0: 1, 1: 2, 2: 1}))
        assert f.order() == 1
        assert LaurentFraction.zero().order() == float("inf")
        g = LaurentFraction(lp({2: 1, 3: 1}), lp({0: 1, 3: 1}))
        assert g.order() == 2

    def test_expand(self):
        two_over = LaurentFraction(lp({0: 2}), lp({0: 1, 1: 2, 2: 1}))
        assert two_over.expand(2) == ts(2, -4, 6)
        f = LaurentFraction(lp({1: 1}), lp({0: 1, 1: 2, 2: 1}))
        assert f.expand(3) == ts(0, 1, -2, 3)
        assert LaurentFraction.zero().expand(3).is_zero()

    def test_expand_against_sympy(self):
        f = LaurentFraction(lp({2: 3, 5: -1}), lp({0: 1, 1: 1, 4: 2}))
        assert list(f.expand(8).coeffs) == sympy_coeffs((3 * q**2 - q**5) / (1 + q + 2 * q**4), 8)

    def test_pole(self):
        f = LaurentFraction(lp({-1: 1}), lp({0: 1}))
        with pytest.raises(PoleError):
            f.expand(3)

    def test_reduced(self):
        f = LaurentFraction(lp({0: 1, 2: -1}), lp({0: 1, 1: 1}))
        r = f.reduced()
        assert r == f
        assert r.den == lp({0: 1})
        assert r.num == lp({0: 1, 1: -1})

    def test_not_hashable(self):
        with pytest.raises(TypeError):
            hash(self.inv1)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(-4, 4).filter(bool), min_size=1, max_size=4))
    def test_expand_is_additive_and_order_is_additive(self, ks):
        fs = [LaurentFraction.inv_one_plus_qk(k) for k in ks]
        n = 6
        total = LaurentFraction.zero()
        expanded = TruncatedSeries.zero(n)
        prod = LaurentFraction.constant(1)
        for f in fs:
            total = total + f
            expanded = expanded + f.expand(n)
            prod = prod * f
        assert total.expand(n) == expanded
        assert prod.order() == sum(f.order() for f in fs)


class TestBivariateSeries:
    def test_product(self):
        a = BivariateSeries.from_rows([[1], [0, 1], []], 2)
        b = BivariateSeries.from_rows([[1], [0, -1], []], 2)
        expected = BivariateSeries.from_rows([[1], [], [0, 0, -1]], 2)
        assert a * b == expected

    def test_coeff(self):
        a = BivariateSeries.from_rows([[1], [3], [5]], 1)
        assert a.coeff(2) == TruncatedSeries.constant(5, 1)

    def test_invert(self):
        a = BivariateSeries.from_rows([[2, 1], [1], [0, 3]], 3)
        assert a * a.invert() == BivariateSeries.one(2, 3)

    def test_derivative(self):
        a = BivariateSeries.from_rows([[1], [2], [3]], 0)
        assert a.derivative().coeff(0) == TruncatedSeries.constant(2, 0)
        assert a.derivative().coeff(1) == TruncatedSeries.constant(6, 0)
