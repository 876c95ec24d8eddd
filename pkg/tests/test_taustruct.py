from fractions import Fraction
from itertools import permutations

import pytest

from mrtau.exactalg import ZERO, u
from mrtau.goldens import omega_golden
from mrtau.kmrealize import get_model
from mrtau.resolvent import LaxOperator
from mrtau.series import OutOfWindow
from mrtau.taustruct import (
    FlowSet,
    ResolventCache,
    TauTable,
    conservation_check,
    derive_flows,
    flow_commutativity,
    flow_for_time,
    hamiltonian_check,
    npoint_coefficient,
    npoint_rhs,
    omega_multi,
    omega_multi_seeded,
    omega_table,
    residue_link_check,
    symmetry_check,
    two_point,
    weight_check,
)


@pytest.mark.parametrize("name,want", [("sk", -u(0).scale(Fraction(2, 3))), ("kk", -u(0).scale(Fraction(2, 3)))])
def test_lowest_entry(tau, name, want):
    _, t, f = tau[name]
    assert t.get(1, 0, 1, 0) == want
    assert f.by_time(1) == -u(1)


@pytest.mark.parametrize("name", ["sk", "kk"])
def test_entries_vanish_at_zero(tau, name):
    _, t, _ = tau[name]
    for key in t.keys():
        assert t.get(*key).substitute({0: ZERO}).is_zero(), key


def test_kdv_table():
    m = get_model("kdv")
    t = omega_table(ResolventCache(LaxOperator(m)), 3)
    assert t.get(1, 0, 1, 0) == u(0).scale(Fraction(-1, 2))
    assert t.get(1, 1, 1, 0) == u(0) ** 2 * Fraction(3, 8) - u(2).scale(Fraction(1, 8))
    f = derive_flows(t)
    assert f.by_time(3) == u(0) * u(1) * Fraction(3, 2) - u(3).scale(Fraction(1, 4))
    assert hamiltonian_check(t, f).ok


@pytest.mark.parametrize("name", ["sk", "kk"])
def test_structural_reports(tau, name):
    _, t, f = tau[name]
    for rep in (symmetry_check(t), conservation_check(t, f), flow_commutativity(f),
                weight_check(t), hamiltonian_check(t, f)):
        assert rep.ok, str(rep)
        assert rep.checked > 0


def test_table_symmetric_lookup(tau):
    _, t, _ = tau["sk"]
    assert t.get(1, 0, 2, 1) == t.get(2, 1, 1, 0)
    with pytest.raises(OutOfWindow):
        t.get(1, 5, 1, 0)


def test_table_json_round_trip(tau):
    _, t, _ = tau["kk"]
    back = TauTable.from_json(t.to_json(), t.model)
    assert back.entries == t.entries


def test_times():
    f = FlowSet(get_model("kk"), {}, Fraction(1))
    assert [f.time(i) for i in [(1, 0), (2, 0), (1, 1), (2, 1)]] == [1, 5, 7, 11]
    with pytest.raises(ValueError, match="t_6 is not a time"):
        f.index_of_time(6)


@pytest.mark.parametrize("name", ["sk", "kk"])
def test_flow_for_time_matches_table(tau, name):
    _, _, f = tau[name]
    idx, rhs = flow_for_time(get_model(name), 7)
    assert idx == (1, 1) and rhs == f.by_time(7)


def test_omega_multi_seed_independent(tau):
    _, t, f = tau["sk"]
    idx = [(1, 0), (2, 0), (1, 1)]
    want = omega_multi(t, f, idx)
    for p in permutations(idx):
        assert omega_multi_seeded(t, f, p[0], p[1], p[2:]) == want


@pytest.mark.parametrize("name", ["sk", "kk"])
@pytest.mark.parametrize("a", [1, 2])
def test_residue_link(tau, name, a):
    cache, _, _ = tau[name]
    assert residue_link_check(cache, a, 2).ok


def test_two_point_at_zero_is_projected_away():
    m = get_model("sk")
    L = LaxOperator(m, {"r": ZERO})
    cache = ResolventCache(L)
    F = two_point(cache.get(1, 2), cache.get(2, 2), 1)
    assert all(not c for c in F.coeffs.values())


def test_npoint_three_matches_multi(tau):
    cache, t, f = tau["kk"]
    idx = [(1, 0), (1, 0), (2, 0)]
    F = npoint_rhs(cache, idx, 0)
    assert npoint_coefficient(F, cache.model, idx) == omega_multi(t, f, idx)


def test_npoint_rejects_four_points(tau):
    cache, _, _ = tau["sk"]
    with pytest.raises(ValueError):
        npoint_rhs(cache, [(1, 0)] * 4)


def test_sk_golden_needs_the_corrected_term(tau):
    _, t, _ = tau["sk"]
    assert t.get(2, 1, 1, 0) == omega_golden("sk", 2, 1)
    assert t.get(2, 1, 1, 0) != omega_golden("sk", 2, 1, corrected=False)
