from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matround.errors import DomainError, ParseError
from matround.fixedpoint import (
    DyadicMatrix,
    RationalMatrix,
    format_exact,
    natural_bits,
    parse_decimal,
    quantize,
    quantize_matrix,
    split_integer_fraction,
)


@pytest.mark.parametrize(
    "text, value",
    [("0.5", Fraction(1, 2)), (" 1.25 ", Fraction(5, 4)), (".1", Fraction(1, 10)), ("3e-2", Fraction(3, 100)),
     ("-0", Fraction(0)), ("7", Fraction(7)), ("2.", Fraction(2))],
)
def test_parse_decimal(text, value):
    assert parse_decimal(text) == value


@pytest.mark.parametrize("text", ["abc", "", "1/2", "0x1", "1.2.3", "nan", "inf"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse_decimal(text, 3, 4)


def test_parse_error_names_cell():
    with pytest.raises(ParseError, match="row 1 column 2"):
        parse_decimal("abc", 1, 2)


def test_negative_is_domain_error():
    with pytest.raises(DomainError):
        parse_decimal("-0.5", 1, 1)


@given(st.fractions(min_value=0, max_value=1000))
def test_format_roundtrip(f):
    text = format_exact(f)
    back = Fraction(text) if "/" in text else parse_decimal(text)
    assert back == f


def test_format_exact_examples():
    assert format_exact(Fraction(3, 8)) == "0.375"
    assert format_exact(Fraction(1, 3)) == "1/3"
    assert format_exact(Fraction(0)) == "0"


def test_dyadic_matrix_roundtrip():
    rows = [[Fraction(1, 4), Fraction(3, 4)], [Fraction(0), Fraction(1, 2)]]
    x = DyadicMatrix.from_fractions(rows)
    assert x.scale_bits == 2
    assert x.to_fractions() == rows
    assert x.with_bits(5).to_fractions() == rows


def test_natural_bits():
    assert natural_bits(RationalMatrix.from_fractions([[Fraction(1, 8), Fraction(1, 2)]])) == 3
    assert natural_bits(RationalMatrix.from_fractions([[Fraction(1, 10)]])) is None


def test_rational_rejects_negative():
    with pytest.raises(DomainError):
        RationalMatrix.from_fractions([[Fraction(-1, 2)]])


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**6).filter(lambda f: f < 1), st.integers(1, 30))
def test_truncate_is_floor(f, bits):
    q = quantize(f, bits, "truncate")
    v = Fraction(q.numerator, 1 << q.scale_bits)
    assert v <= f < v + Fraction(1, 1 << bits)


def test_unbiased_quantize_mean(rng):
    f = Fraction(1, 3)
    ups = sum(quantize(f, 2, "unbiased", rng).numerator == 2 for _ in range(20000))
    # 1/3 = 1/4 + (1/3)(1/4): rounds up to 2/4 with probability 1/3
    assert abs(ups / 20000 - 1 / 3) < 4 * (2 / 9 / 20000) ** 0.5


def test_quantize_matrix_truncate():
    rm = RationalMatrix.from_fractions([[Fraction(1, 3), Fraction(2, 3)]])
    x = quantize_matrix(rm, 3, "truncate")
    assert x.to_fractions() == [[Fraction(2, 8), Fraction(5, 8)]]


def test_split_integer_fraction():
    rm = RationalMatrix.from_fractions([[Fraction(7, 2), Fraction(3)]])
    whole, frac = split_integer_fraction(rm)
    assert whole.tolist() == [[3, 3]]
    assert frac.to_fractions() == [[Fraction(1, 2), Fraction(0)]]


def test_large_bits_use_python_ints():
    v = Fraction(2**70 - 1, 2**70)
    x = DyadicMatrix.from_fractions([[v]])
    assert x.scale_bits == 70
    assert x.to_fractions() == [[v]]
    assert np.asarray(x.numerators).dtype == object


def test_quantize_rejects_one():
    with pytest.raises(DomainError):
        quantize(Fraction(1), 3)
