from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import diffpolys
from mrtau.exactalg import (
    ONE,
    ZERO,
    DiffPoly,
    FlowDerivation,
    NonHomogeneous,
    NotExact,
    WeightScheme,
    integrate_x,
    is_homogeneous,
    is_total_derivative,
    u,
    variational_derivative,
    weight_of,
)
from mrtau.goldens import parse_latex_poly


def test_leibniz_on_jets():
    f = u(0) * u(1)
    assert f.dx() == u(1) ** 2 + u(0) * u(2)


def test_text_rendering_is_canonical():
    f = u(2) - u(0) ** 2 + Fraction(1, 3) * u(1)
    assert f.to_text() == "1/3*u_x - u^2 + u_2x"
    assert str(ZERO) == "0"


def test_constant_is_not_exact():
    with pytest.raises(NotExact):
        integrate_x(ONE)
    assert not is_total_derivative(u(0))


def test_variational_derivative_of_kdv_density():
    h = u(0) ** 3 - Fraction(1, 2) * u(1) ** 2
    assert variational_derivative(h) == 3 * u(0) ** 2 + u(2)


def test_weights():
    assert weight_of(u(0) * u(2)) == 6
    with pytest.raises(NonHomogeneous):
        weight_of(u(0) + u(1))
    two = WeightScheme((Fraction(2), Fraction(1)))
    assert weight_of(u(0) + u(0, 1) ** 2, two) == 2


def test_substitute_second_variable():
    v = u(0, 1)
    f = u(1) * v
    assert f.substitute({1: u(0) ** 2}) == u(1) * u(0) ** 2


def test_flow_derivation_acts_on_jets():
    D = FlowDerivation({0: -u(1)})
    assert D(u(0) ** 2) == -2 * u(0) * u(1)
    assert D(u(2)) == -u(3)


def test_parse_latex_poly():
    p = parse_latex_poly(r"-7u^4+42u^2u_{2x}+21u u_{x}^2-\frac{1}{3}u_{xx}")
    want = -7 * u(0) ** 4 + 42 * u(0) ** 2 * u(2) + 21 * u(0) * u(1) ** 2 - Fraction(1, 3) * u(2)
    assert p == want


@given(diffpolys())
def test_euler_kills_total_derivatives(f):
    assert is_total_derivative(f.dx() + ZERO) or f.dx().is_zero()
    assert variational_derivative(f.dx()).is_zero()


@given(diffpolys())
def test_integrate_round_trip(f):
    g = f - DiffPoly.const(f.constant_term())
    assert integrate_x(g.dx()) == g


@given(diffpolys(), diffpolys())
def test_dx_is_a_derivation(f, g):
    assert (f * g).dx() == f.dx() * g + f * g.dx()


@given(diffpolys(nvars=2))
def test_json_round_trip(f):
    assert DiffPoly.from_json(f.to_json()) == f


@given(diffpolys(), diffpolys())
def test_ring_axioms(f, g):
    assert f + g == g + f
    assert f * g == g * f
    assert (f - g) + g == f


@given(st.integers(0, 6), st.integers(0, 6))
def test_monomial_weight(k, j):
    f = u(k) * u(j)
    assert weight_of(f) == 4 + k + j
    assert is_homogeneous(f.dx())
    assert weight_of(f.dx()) == weight_of(f) + 1
