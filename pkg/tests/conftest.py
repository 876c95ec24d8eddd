from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mrtau.exactalg import DiffPoly
from mrtau.kmrealize import get_model
from mrtau.resolvent import LaxOperator
from mrtau.taustruct import ResolventCache, derive_flows, omega_table

settings.register_profile(
    "mrtau", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("mrtau")

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
small_fractions = st.integers(-4, 4).map(Fraction)


@st.composite
def monomials(draw, max_order=4, max_degree=3, nvars=1):
    n = draw(st.integers(0, max_degree))
    d = {}
    for _ in range(n):
        j = (draw(st.integers(0, nvars - 1)), draw(st.integers(0, max_order)))
        d[j] = d.get(j, 0) + 1
    return tuple(sorted(d.items()))


@st.composite
def diffpolys(draw, max_terms=4, nvars=1, max_order=4):
    terms = draw(st.lists(st.tuples(monomials(max_order=max_order, nvars=nvars), fractions),
                          max_size=max_terms))
    out = {}
    for m, c in terms:
        out[m] = out.get(m, Fraction(0)) + c
    return DiffPoly(out)


@pytest.fixture(scope="session")
def tau():
    """Per model: (cache, depth-2 table, flows)."""
    out = {}
    for name in ("sk", "kk"):
        cache = ResolventCache(LaxOperator(get_model(name)))
        t = omega_table(cache, 2)
        out[name] = (cache, t, derive_flows(t))
    return out
