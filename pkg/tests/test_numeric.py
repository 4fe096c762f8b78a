from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from droneplan.numeric import frac, frac_str, money_str


def test_frac_conversions():
    assert frac("0.1") == Fraction(1, 10)
    assert frac("3/7") == Fraction(3, 7)
    assert frac(5) == Fraction(5)
    assert frac(0.5) == Fraction(1, 2)
    assert frac(Decimal("2.25")) == Fraction(9, 4)
    with pytest.raises(ValueError):
        frac("abc")
    with pytest.raises(TypeError):
        frac(None)


def test_frac_str_decimal_forms():
    assert frac_str(Fraction(1, 10)) == "0.1"
    assert frac_str(Fraction(-9, 4)) == "-2.25"
    assert frac_str(Fraction(3)) == "3"
    assert frac_str(Fraction(1, 3)) == "1/3"
    assert frac_str(Fraction(0)) == "0"


@given(st.fractions(max_denominator=10**9))
def test_frac_str_round_trips(x):
    assert frac(frac_str(x)) == x


def test_money_rounding_half_even():
    assert money_str(Fraction(1)) == "1.00"
    assert money_str(Fraction(125, 1000)) == "0.12"  # 0.125 -> even cent
    assert money_str(Fraction(135, 1000)) == "0.14"
    assert money_str(Fraction(-125, 1000)) == "-0.12"
    assert money_str(Fraction(8976, 1000)) == "8.98"
