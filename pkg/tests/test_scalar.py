from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from bcov.scalar import (
    GaussianRational,
    abs_bound,
    conj,
    format_scalar,
    imag_part,
    is_real,
    parse_scalar,
    real_part,
    scalar,
)

rats = st.fractions(max_denominator=50).map(lambda f: mpq(f.numerator, f.denominator))
gauss = st.tuples(rats, rats).map(lambda p: scalar(*p))


def as_complex_fraction(x):
    return Fraction(int(real_part(x).numerator), int(real_part(x).denominator)), Fraction(
        int(imag_part(x).numerator), int(imag_part(x).denominator)
    )


@pytest.mark.parametrize(
    "text, re_, im_",
    [
        ("3", 3, 0),
        ("-2/4", Fraction(-1, 2), 0),
        ("+5/1", 5, 0),
        ("i", 0, 1),
        ("-i", 0, -1),
        ("1/2+3/4*i", Fraction(1, 2), Fraction(3, 4)),
        ("1/2-i", Fraction(1, 2), -1),
        ("2/3*i", 0, Fraction(2, 3)),
        (" 1 / 2 ", Fraction(1, 2), 0),
    ],
)
def test_parse_scalar_forms(text, re_, im_):
    x = parse_scalar(text)
    assert as_complex_fraction(x) == (Fraction(re_), Fraction(im_))


@pytest.mark.parametrize("text", ["", "abc", "1/0", "1.5", "1//2", "2+", "*i", None, 3])
def test_parse_scalar_rejects(text):
    with pytest.raises(ValueError):
        parse_scalar(text)


def test_normalization_collapses_to_real():
    i = scalar(0, 1)
    assert isinstance(i, GaussianRational)
    assert i * i == mpq(-1) and is_real(i * i)
    assert (i + 1) - i == 1 and is_real((i + 1) - i)
    assert conj(i) == -i
    assert abs_bound(scalar(-1, 2)) == 3


def test_format_scalar():
    assert format_scalar(mpq(3)) == "3/1"
    assert format_scalar(scalar(mpq(1, 2), -1)) == "1/2-1/1*i"


@given(gauss)
def test_format_parse_round_trip(x):
    assert parse_scalar(format_scalar(x)) == x


@given(gauss, gauss, gauss)
def test_field_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    if x != 0:
        assert (y / x) * x == y
        assert (1 / x) * x == 1


@given(gauss, gauss)
def test_matches_python_complex_fractions(x, y):
    a, b = as_complex_fraction(x)
    c, d = as_complex_fraction(y)
    assert as_complex_fraction(x * y) == (a * c - b * d, a * d + b * c)
    assert as_complex_fraction(x - y) == (a - c, b - d)
