from fractions import Fraction

import pytest

from quasitiling.rationals import as_rational, ceil_fraction, fmt_rational, largest_dyadic


def test_parsing():
    assert as_rational("1/2") == Fraction(1, 2)
    assert as_rational(0.49) == Fraction(49, 100)
    assert as_rational(3) == 3
    with pytest.raises((TypeError, ValueError)):
        as_rational(True)


def test_formatting_and_ceil():
    assert fmt_rational(Fraction(3, 2)) == "3/2"
    assert fmt_rational(Fraction(4, 2)) == "2"
    assert ceil_fraction(Fraction(3, 2)) == 2
    assert ceil_fraction(Fraction(-3, 2)) == -1
    assert ceil_fraction(Fraction(2)) == 2


def test_largest_dyadic():
    assert largest_dyadic(lambda d: d < Fraction(1, 5)) == Fraction(1, 8)
    assert largest_dyadic(lambda d: False) is None
    assert largest_dyadic(lambda d: d <= Fraction(1, 2**40)) == Fraction(1, 2**40)
