from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import small_fractions
from mrtau.series import (
    LaurentSeries,
    MultiLaurent,
    NotDivisible,
    OutOfWindow,
    difference,
    divide_by_difference,
    exact_divide_diagonal,
    project_pi,
    project_pi_multi,
    residue,
)

laurent = st.dictionaries(st.integers(-8, 4), small_fractions, max_size=6).map(LaurentSeries)


@st.composite
def bivariate(draw, nvars=2):
    cs = draw(st.dictionaries(st.tuples(*[st.integers(-4, 3)] * nvars), small_fractions, max_size=6))
    return MultiLaurent(nvars, cs)


def test_truncated_product_floor():
    a = LaurentSeries({0: 1, -1: 2}, floor=-3)
    b = LaurentSeries({1: 1})
    c = a * b
    assert c.floor == -2
    assert c.coefficient(0) == 2
    with pytest.raises(OutOfWindow):
        c.coefficient(-3)


def test_residue_and_pi():
    f = LaurentSeries({-1: Fraction(3), -2: 1, -5: 7, 2: 1})
    assert residue(f) == 3
    assert project_pi(f, 4).coeffs == {-1: 3, -5: 7}


def test_non_divisible_raises():
    f = MultiLaurent(2, {(1, 0): Fraction(1)})
    with pytest.raises(NotDivisible):
        divide_by_difference(f, 0, 1)


def test_u0_numerator_quotient():
    # -1/2 l^4 + 2 l m^3 - 3/2 m^4 = (l - m)^2 (-1/2 l^2 - l m - 3/2 m^2)
    num = MultiLaurent(2, {(4, 0): Fraction(-1, 2), (1, 3): Fraction(2), (0, 4): Fraction(-3, 2)})
    q = exact_divide_diagonal(num, 2)
    assert q.coeffs == {(2, 0): Fraction(-1, 2), (1, 1): Fraction(-1), (0, 2): Fraction(-3, 2)}
    assert not project_pi_multi(q, 4)


@given(laurent, st.integers(1, 4))
def test_pi_idempotent(f, N):
    p = project_pi(f, N)
    assert project_pi(p, N) == p
    assert all(k < 0 and (k + 1) % N == 0 for k in p.coeffs)


@given(laurent, laurent)
def test_product_commutes(f, g):
    assert f * g == g * f


@given(bivariate(), st.booleans())
def test_division_round_trip(f, from_top):
    g = f.mul_exact(difference(2, 0, 1))
    assert divide_by_difference(g, 0, 1, from_top) == f


@given(bivariate(nvars=3), st.sampled_from([(0, 1), (1, 2), (2, 0)]))
def test_division_round_trip_three_vars(f, pair):
    i, j = pair
    g = f.mul_exact(difference(3, i, j))
    assert divide_by_difference(g, i, j) == f


@given(bivariate(), st.integers(1, 4))
def test_pi_multi_idempotent(f, N):
    p = project_pi_multi(f, N)
    assert project_pi_multi(p, N) == p
