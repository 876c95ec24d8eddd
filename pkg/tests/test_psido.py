from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import diffpolys
from mrtau.exactalg import ONE, ZERO, is_total_derivative, u
from mrtau.kmrealize import get_model
from mrtau.psido import (
    NonMonic,
    PsiDO,
    compose,
    fractional_power,
    gbinom,
    lax_operator,
    lax_residue,
    nth_root,
    parse_power,
    residue_psido,
)
from mrtau.resolvent import LaxOperator
from mrtau.taustruct import ResolventCache, derive_flows, omega_table


def test_gbinom():
    assert gbinom(-1, 3) == -1
    assert gbinom(5, 2) == 10
    assert gbinom(2, 3) == 0


def test_leibniz_rule():
    f = u(0)
    assert compose(PsiDO.d(), PsiDO.mult(f)) == PsiDO({1: f, 0: f.dx()})


def test_inverse_derivative_commutation():
    # ∂^{-1} ∘ u = u ∂^{-1} - u_x ∂^{-2} + u_xx ∂^{-3} - ...
    P = compose(PsiDO({-1: ONE}, -3), PsiDO.mult(u(0)))
    assert P.coeffs == {-1: u(0), -2: -u(1), -3: u(2)}


def test_kdv_square_root_and_residue():
    L, n, _ = lax_operator("kdv")
    X = nth_root(L, n, -2)
    assert X.coeffs == {1: ONE, -1: u(0).scale(Fraction(-1, 2)), -2: u(1).scale(Fraction(1, 4))}
    assert lax_residue("kdv", 1) == u(0).scale(Fraction(-1, 2))


def test_root_cubes_back():
    L, n, _ = lax_operator("sk")
    X = nth_root(L, n, -6)
    assert compose(compose(X, X), X).agrees_with(L)


def test_non_monic_rejected():
    with pytest.raises(NonMonic):
        nth_root(PsiDO({3: ONE.scale(2)}), 3, -2)


def test_parse_power():
    assert parse_power("5/3") == (5, 3)
    assert parse_power("2") == (2, 1)


@pytest.mark.parametrize("name", ["sk", "kk"])
@pytest.mark.parametrize("p,q", [(1, 2), (2, 5), (4, 1)])
def test_fractional_powers_add(name, p, q):
    L, n, _ = lax_operator(name)
    A = fractional_power(L, p, n, -4)
    B = fractional_power(L, q, n, -4)
    assert compose(A, B).agrees_with(fractional_power(L, p + q, n, -4 + max(p, q) - min(p, q) - 0))


@pytest.mark.parametrize("name,times", [("kdv", (1, 3, 5)), ("sk", (1, 5, 7)), ("kk", (1, 5, 7))])
def test_flows_agree_with_lax_commutator(name, times):
    # ∂u/∂t_T is the ∂^{n-2} coefficient of [(L^{T/n})_+, L] over the u-coefficient there
    L, n, _ = lax_operator(name)
    m = get_model(name)
    f = derive_flows(omega_table(ResolventCache(LaxOperator(m)), 2))
    ucoef = L.coefficient(n - 2).partial((0, 0)).constant_term()
    for T in times:
        P = PsiDO(fractional_power(L, T, n, 0).coeffs)
        C = compose(P, L) - compose(L, P)
        assert C.coefficient(n - 2).scale(-1 / ucoef) == f.by_time(T), T


coeff_polys = diffpolys(max_terms=2, max_order=2)


@given(coeff_polys, coeff_polys, coeff_polys)
def test_composition_associative(a, b, c):
    A, B, C = (PsiDO({1: ONE, 0: a}), PsiDO({1: b, 0: ONE}), PsiDO({2: c}))
    assert compose(compose(A, B), C) == compose(A, compose(B, C))


@given(coeff_polys, coeff_polys)
def test_residue_of_commutator_is_exact(a, b):
    A = PsiDO({1: ONE, -1: a}, -4)
    B = PsiDO({2: b, 0: ONE}, -3)
    r = residue_psido(compose(A, B) - compose(B, A))
    assert r.is_zero() or is_total_derivative(r)


@given(st.integers(1, 7))
def test_residue_has_right_weight(p):
    from mrtau.exactalg import weight_of
    r = lax_residue("sk", p)
    assert r.is_zero() or weight_of(r) == p + 1
