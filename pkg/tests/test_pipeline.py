from fractions import Fraction

import numpy as np
import pytest
from conftest import dyadic_matrices
from hypothesis import given
from hypothesis import strategies as st

from matround.errors import DomainError
from matround.fixedpoint import DyadicMatrix
from matround.pipeline import (
    RoundingOptions,
    controlled_table,
    default_bits,
    pad_to_integral_sums,
    round_general,
    round_matrix,
)

F = Fraction


def test_padding_example():
    x = DyadicMatrix.from_fractions([[F(1, 4), F(1, 2)], [F(3, 4), F(1, 4)]])
    p = pad_to_integral_sums(x)
    assert p.to_fractions() == [
        [F(1, 4), F(1, 2), F(1, 4)],
        [F(3, 4), F(1, 4), F(0)],
        [F(0), F(1, 4), F(3, 4)],
    ]


@given(dyadic_matrices())
def test_padded_sums_integral(case):
    num, bits = case
    p = pad_to_integral_sums(DyadicMatrix(num, bits))
    scale = 1 << bits
    assert (p.numerators.sum(axis=0) % scale == 0).all()
    assert (p.numerators.sum(axis=1) % scale == 0).all()


def test_single_half():
    assert round_matrix(DyadicMatrix.from_fractions([[F(1, 2)]])).y.tolist() == [[0]]


@given(dyadic_matrices(), st.sampled_from(["deterministic", "unbiased"]), st.integers(0, 2**32))
def test_round_matrix_certified(case, mode, seed):
    num, bits = case
    res = round_matrix(DyadicMatrix(num, bits), RoundingOptions(mode=mode, seed=seed))
    assert res.certificate.passed
    assert res.certificate.max_initial_row <= 1 - F(1, 1 << bits)


def test_round_matrix_rejects_fewer_bits():
    with pytest.raises(DomainError):
        round_matrix(DyadicMatrix.from_fractions([[F(1, 8)]]), RoundingOptions(bits=2))


def test_default_bits():
    assert default_bits(3, 3) == (4 * 27).bit_length()
    assert 2 ** default_bits(7, 5) > 4 * 35 * 7


@given(st.lists(st.lists(st.decimals(0, 500, places=3, allow_nan=False), min_size=3, max_size=3), min_size=1, max_size=5))
def test_round_general_decimals(rows):
    vals = [[F(v) for v in row] for row in rows]
    res = round_general(vals)
    assert res.certificate.passed
    floor = np.array([[int(v) for v in row] for row in vals])
    assert ((res.y - floor) >= 0).all() and ((res.y - floor) <= 1).all()


def test_deterministic_is_reproducible():
    vals = [[F(1, 3), F(2, 7), F(5, 9)], [F(1, 10), F(9, 10), F(1, 2)]]
    a = round_general(vals)
    b = round_general(vals)
    assert (a.y == b.y).all() and a.attempt == b.attempt


def test_unbiased_seed_reproducible():
    vals = [[F(1, 3), F(2, 7)], [F(5, 9), F(1, 10)]]
    a = round_general(vals, RoundingOptions(mode="unbiased", seed=9))
    b = round_general(vals, RoundingOptions(mode="unbiased", seed=9))
    assert (a.y == b.y).all()


def test_unbiased_autoseed_recorded():
    res = round_general([[F(1, 2)]], RoundingOptions(mode="unbiased"))
    assert isinstance(res.seed, int)
    again = round_general([[F(1, 2)]], RoundingOptions(mode="unbiased", seed=res.seed))
    assert (again.y == res.y).all()


def test_controlled_table_example():
    ct = controlled_table([[15, 25], [35, 45]], base=10)
    assert ct.inner.tolist() == [[10, 30], [40, 40]]
    assert ct.row_totals.tolist() == [40, 80]
    assert ct.col_totals.tolist() == [50, 70]
    assert ct.grand_total == 120


def test_controlled_table_totals_within_base():
    ct = controlled_table([[10, 30], [40, 40]], base=100)
    arr = ct.as_array()
    assert (arr[:-1, -1] == arr[:-1, :-1].sum(axis=1)).all()
    assert (arr[-1, :-1] == arr[:-1, :-1].sum(axis=0)).all()
    assert (np.abs(arr[:-1, -1] - np.array([40, 80])) < 100).all()
    assert (np.abs(arr[-1, :-1] - np.array([50, 70])) < 100).all()
    assert abs(int(arr[-1, -1]) - 120) < 100


def test_options_validate():
    with pytest.raises(ValueError):
        RoundingOptions(mode="nearest")
    with pytest.raises(ValueError):
        RoundingOptions(base=0)
    with pytest.raises(ValueError):
        RoundingOptions(bits=0)
