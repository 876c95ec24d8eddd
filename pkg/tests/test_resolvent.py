import pytest

from mrtau.exactalg import ZERO, u
from mrtau.kmrealize import get_model, pair
from mrtau.resolvent import (
    LaxOperator,
    basic_resolvent,
    dressing,
    dressing_defect,
    model_specific_oracle,
)


@pytest.mark.parametrize("name", ["sk", "kk"])
@pytest.mark.parametrize("a", [1, 2])
def test_agrees_with_scalar_oracle(name, a):
    L = LaxOperator(get_model(name))
    assert basic_resolvent(L, a, 3).element.agrees_with(model_specific_oracle(L, a, 3).element)


@pytest.mark.parametrize("name", ["sk", "kk", "kdv"])
def test_vacuum_resolvent_is_lambda(name):
    m = get_model(name)
    L = LaxOperator(m)
    for a in range(1, m.n + 1):
        R = basic_resolvent(L, a, 2).element.map(lambda c: c.substitute({0: ZERO}))
        assert R.agrees_with(m.Lambda(a))


@pytest.mark.parametrize("name", ["sk", "kk"])
def test_commutes_with_lax(name):
    L = LaxOperator(get_model(name))
    R = basic_resolvent(L, 2, 2)
    assert L.commutator(R.element).is_zero()


def test_kdv_pairing_normalization():
    m = get_model("kdv")
    R = basic_resolvent(LaxOperator(m), 1, 3).element
    p = pair(R, R)
    assert p.coeffs == {m.N: m.h}


@pytest.mark.parametrize("name", ["sk", "kk"])
def test_dressing_defect_vanishes(name):
    L = LaxOperator(get_model(name))
    dp = dressing(L, 2)
    assert dressing_defect(L, dp).is_zero()


def test_q_outside_borel_rejected():
    with pytest.raises(ValueError, match="outside the Borel"):
        LaxOperator(get_model("sk"), {"b1": u(0)})
