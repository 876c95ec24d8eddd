from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import small_fractions
from mrtau.exactalg import u
from mrtau.kmrealize import (
    LoopElement,
    ModelValidationError,
    b_form,
    bracket,
    canonical_gauge,
    get_model,
    model_catalog,
    pair,
    validate_model,
)
from mrtau.series import LaurentSeries

SK = get_model("sk")


@pytest.mark.parametrize("model", model_catalog(), ids=lambda m: m.name)
def test_shipped_models_validate(model):
    validate_model(model)
    assert model.N == model.r * model.a_m


def test_scalar_data():
    assert (SK.N, SK.rh, SK.n, SK.exponents) == (4, 6, 2, (1, 5))
    kk = get_model("kk")
    assert (kk.N, kk.rh, kk.exponents) == (2, 6, (1, 5))
    with pytest.raises(IndexError, match="exponent index out of range"):
        SK.exponent_index(3)


def test_unknown_model():
    with pytest.raises(KeyError):
        get_model("boussinesq")


def test_broken_model_is_rejected():
    from dataclasses import replace
    with pytest.raises(ModelValidationError):
        validate_model(replace(SK, h=5))


def test_canonical_gauge_example():
    v = u(0, 1)
    N, qc = canonical_gauge({"r": u(0), "a1": v}, SK)
    assert N == {"r": v}
    assert qc == {"r": u(0) - v.dx() + v ** 2}


def test_canonical_q_is_fixed():
    N, qc = canonical_gauge({"r": u(0)}, SK)
    assert not N and qc == {"r": u(0)}


def test_heisenberg_commute():
    assert bracket(SK.Lambda(1), SK.Lambda(2)).is_zero()


def _elements(model):
    slot = st.sampled_from(model.slot_names)
    series = st.dictionaries(st.integers(-3, 3), small_fractions, max_size=3).map(LaurentSeries)
    return st.dictionaries(slot, series, max_size=3).map(lambda d: LoopElement(model, d))


@given(_elements(SK), _elements(SK), _elements(SK))
def test_b_form_cyclic(x, y, z):
    B = b_form([x, y, z])
    C = b_form([y, z, x])
    assert {(k[2], k[0], k[1]): c for k, c in C.coeffs.items()} == B.coeffs


@given(_elements(SK), _elements(SK))
def test_b_form_two_is_multiple_of_pairing(x, y):
    # tr(ad x ad y) = 2h^∨ (x|y) on the diagonal λ = μ
    B = b_form([x, y])
    diag = {}
    for (i, j), c in B.coeffs.items():
        diag[i + j] = diag.get(i + j, 0) + c
    P = pair(x, y).scale(2 * SK.h_dual_g)
    assert {k: v for k, v in diag.items() if v} == P.coeffs


@given(_elements(SK), _elements(SK), _elements(SK))
def test_pairing_invariant(x, y, z):
    assert pair(bracket(x, y), z) == pair(x, bracket(y, z))
