"""Exact q-expansion arithmetic and the Eisenstein constructors."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from spherelp.errors import (DivideByZeroSeries, InvalidWeight,
                             OrderUnderflow, TailTooLarge)
from spherelp.qseries import (
    QSeries, bernoulli_number, divisor_sigma, eisenstein_normalizer,
    eisenstein_qseries, theta_z_qseries,
)


class TestNumberTheory:
    def test_divisor_sigma(self):
        assert divisor_sigma(3, 1) == 1
        assert divisor_sigma(3, 2) == 9
        assert divisor_sigma(3, 6) == 252
        assert divisor_sigma(1, 12) == 28

    def test_bernoulli(self):
        assert bernoulli_number(2) == Fraction(1, 6)
        assert bernoulli_number(4) == Fraction(-1, 30)
        assert bernoulli_number(12) == Fraction(-691, 2730)


class TestEisenstein:
    def test_e4_coefficients(self):
        e4 = eisenstein_qseries(4, 6)
        assert [e4.coeff(m) for m in range(4)] == [1, 240, 2160, 6720]

    def test_e6_coefficients(self):
        e6 = eisenstein_qseries(6, 4)
        assert [e6.coeff(m) for m in range(3)] == [1, -504, -16632]

    def test_e2_coefficients(self):
        e2 = eisenstein_qseries(2, 4)
        assert [e2.coeff(m) for m in range(3)] == [1, -24, -72]

    def test_normalizer(self):
        assert eisenstein_normalizer(4) == 240
        assert eisenstein_normalizer(6) == -504

    def test_odd_weight_rejected(self):
        with pytest.raises(InvalidWeight):
            eisenstein_qseries(3, 5)


class TestArithmetic:
    def test_discriminant_combination(self):
        """E4^3 - E6^2 = 1728 q + O(q^2): the classical cusp-form identity."""
        order = 8
        delta = (eisenstein_qseries(4, order) ** 3
                 - eisenstein_qseries(6, order) ** 2)
        assert delta.coeff(0) == 0
        assert delta.coeff(1) == 1728
        assert delta.coeff(2) == -41472  # 1728 * tau(2), tau(2) = -24

    def test_inverse(self):
        e4 = eisenstein_qseries(4, 10)
        one = e4 * e4.inverse()
        assert all(one.coeff(m) == (1 if m == 0 else 0) for m in range(11))

    def test_inverse_of_positive_valuation_series_is_laurent(self):
        # delta = E4^3 - E6^2 = 1728 q + ... has valuation 1, so its
        # inverse starts at q^-1 and multiplies back to 1
        delta = (eisenstein_qseries(4, 6) ** 3
                 - eisenstein_qseries(6, 6) ** 2)
        inv = delta.inverse()
        assert inv.min_exp == -1
        assert inv.coeff(-1) == Fraction(1, 1728)
        one = delta * inv
        assert all(one.coeff(m) == (1 if m == 0 else 0)
                   for m in range(one.min_exp, one.order + 1))

    def test_inverse_of_zero_series_fails(self):
        zero = QSeries(1, 0, [Fraction(0)] * 7, 6, 0)
        with pytest.raises(DivideByZeroSeries):
            zero.inverse()

    def test_theta_z_fourth_power_counts(self):
        """theta^4 counts representations as four squares: 1, 8, 24, 32, 24."""
        th4 = theta_z_qseries(12) ** 4
        assert [th4.coeff(m) for m in range(5)] == [1, 8, 24, 32, 24]

    def test_order_underflow(self):
        with pytest.raises(OrderUnderflow):
            QSeries(1, 2, [Fraction(1)], 0)


class TestSerialization:
    def test_json_roundtrip(self):
        e6 = eisenstein_qseries(6, 8)
        again = QSeries.from_json_dict(e6.to_json_dict())
        assert again == e6

    def test_checksum_is_stable(self):
        a = eisenstein_qseries(4, 8)
        b = eisenstein_qseries(4, 8)
        assert a.checksum() == b.checksum()


class TestEvaluation:
    def test_eval_matches_nome_path(self):
        e4 = eisenstein_qseries(4, 40)
        z = mp.mpc(0.1, 1.2)
        with mp.workprec(160):
            q = mp.exp(2j * mp.pi * z)
        v1, _ = e4.eval(z, precision=128)
        v2, _ = e4.eval_nome(q, precision=128)
        assert abs(v1 - v2) < 1e-30

    def test_tail_guard(self):
        e4 = eisenstein_qseries(4, 4)
        with pytest.raises(TailTooLarge):
            e4.eval(mp.mpc(0, 0.05), precision=128)

    def test_nome_on_unit_circle_rejected(self):
        with pytest.raises(TailTooLarge):
            eisenstein_qseries(4, 4).eval_nome(mp.mpf(1))


small_fractions = st.fractions(min_value=Fraction(-5), max_value=Fraction(5),
                               max_denominator=6)


def series_strategy(order=5, nome_div=1):
    return st.lists(small_fractions, min_size=order + 1,
                    max_size=order + 1).map(
        lambda cs: QSeries(nome_div, 0, cs, order))


@settings(max_examples=50, deadline=None)
@given(a=series_strategy(), b=series_strategy(), c=series_strategy())
def test_ring_distributivity(a, b, c):
    assert (a + b) * c == a * c + b * c


@settings(max_examples=50, deadline=None)
@given(a=series_strategy(), b=series_strategy())
def test_ring_commutativity(a, b):
    assert a * b == b * a
    assert a + b == b + a


@settings(max_examples=50, deadline=None)
@given(a=series_strategy(nome_div=2))
def test_translate_involution(a):
    assert a.translate().translate() == a


@settings(max_examples=30, deadline=None)
@given(a=series_strategy())
def test_translate_fixes_integer_nome(a):
    assert a.translate() == a
