"""Basic resolvents and the dressing pair of a Drinfeld–Sokolov Lax operator.

Everything works on principal-degree slices: a homogeneous component is a
map slot -> DiffPoly and the λ-power of each slot is implied by the degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .exactalg import ONE, ZERO, DiffPoly, integrate_x, u
from .kmrealize import (
    HierarchyModel,
    LoopElement,
    Slice,
    bracket,
    slice_bracket,
)
from .series import LaurentSeries


class InsufficientDepth(ValueError):
    pass


@dataclass(frozen=True)
class LaxOperator:
    """ℒ = ∂ + Λ + q with q given by slot coordinates at λ^0."""

    model: HierarchyModel
    q: Mapping[str, DiffPoly] = field(default=None)

    def __post_init__(self):
        if self.q is None:
            qc = {}
            for s, (slot, c) in enumerate(self.model.gauge_V):
                qc[slot] = qc.get(slot, ZERO) + u(0, s).scale(c)
            object.__setattr__(self, "q", qc)
        bad = set(self.q) - set(self.model.borel)
        if bad:
            raise ValueError(f"q has components {sorted(bad)} outside the Borel subalgebra")

    @classmethod
    def canonical(cls, model: HierarchyModel) -> "LaxOperator":
        return cls(model)

    def q_slices(self) -> Dict[int, Slice]:
        """Principal-degree components of q (all at λ^0)."""
        out: Dict[int, Slice] = {}
        for s, c in self.q.items():
            if not c:
                continue
            d = self.model.principal_degree_of(s, 0)
            if d.denominator != 1:
                raise ValueError(f"slot {s} has no λ^0 component")
            out.setdefault(int(d), {})[s] = c
        return out

    def q_element(self) -> LoopElement:
        return LoopElement(self.model, {s: LaurentSeries({0: c}) for s, c in self.q.items() if c})

    def commutator(self, R: LoopElement) -> LoopElement:
        """[ℒ, R] = ∂_x R + [Λ + q, R]."""
        m = self.model
        return R.dx() + bracket(m.Lambda(1) + self.q_element(), R)

    @property
    def ring_vars(self) -> Tuple[int, ...]:
        return tuple(sorted({j[0] for c in self.q.values() for j in c.jets()}))


@dataclass
class Resolvent:
    model: HierarchyModel
    a: int
    depth: int
    slices: Dict[int, Slice]
    min_degree: int
    element: LoopElement

    @property
    def exponent(self) -> int:
        return self.model.exponent_index(self.a)

    def slot_series(self, slot: str) -> LaurentSeries:
        return self.element.part(slot)

    def to_json(self) -> dict:
        return {
            "model": self.model.name,
            "a": self.a,
            "depth": self.depth,
            "slots": self.element.to_json(),
        }


def min_degree_for_depth(model: HierarchyModel, depth: int) -> int:
    """Lowest principal degree needed so that every slot is known at λ^{-N·depth}."""
    lo = None
    for s in model.slot_names:
        k = -model.N * depth
        res = model.slot_by_name[s].residue
        while (k - res) % model.N:
            k += 1
        d = model.principal_degree_of(s, k)
        d = int(d) if d.denominator == 1 else int(d)
        lo = d if lo is None else min(lo, d)
    return lo


def _add_slice(x: Slice, y: Slice, scale=None) -> Slice:
    out = dict(x)
    for s, c in y.items():
        if scale is not None:
            c = c * scale
        out[s] = out[s] + c if s in out else c
    return {s: c for s, c in out.items() if c}


def _scale_slice(x: Slice, c) -> Slice:
    return {s: v * c for s, v in x.items() if v}


def _heis_slices(model: HierarchyModel, d: int) -> List[Slice]:
    return [{s: DiffPoly.const(c) for s, c in h.items()} for h in model.heisenberg_slice(d)]


def basic_resolvent(L: LaxOperator, a: int, depth: int) -> Resolvent:
    """Solve [ℒ, R] = 0 with R = Λ_{m_a} + lower principal degrees.

    At each degree t the equation [Λ, R_{t-1}] = -∂_x R_t - Σ_j [q_j, R_{t-j}]
    is split into its ℋ part, whose vanishing fixes the ℋ-coefficient of R_t
    by an x-integration with zero constant, and its image part, which is
    inverted through ad Λ.
    """
    if depth < 1:
        raise InsufficientDepth("depth must be at least 1")
    m = L.model
    top = m.exponent_index(a)
    dmin = min_degree_for_depth(m, depth)
    solver = m.ad_lambda_solver
    qs = L.q_slices()
    q0 = qs.get(0, {})
    R: Dict[int, Slice] = {top: _heis_slices(m, top)[0]}
    for d in range(top - 1, dmin - 2, -1):
        t = d + 1
        T: Slice = {}
        Rt = R.get(t, {})
        if Rt:
            T = _add_slice(T, {s: -c.dx() for s, c in Rt.items()})
        for j, qj in qs.items():
            src = R.get(t - j)
            if src:
                T = _add_slice(T, slice_bracket(m, qj, src), -1)
        hc, Y = solver.split(t, T)
        if t < top and hc:
            hs = _heis_slices(m, t)
            for c_x, hv in zip(hc, hs):
                if not c_x:
                    continue
                c = integrate_x(c_x)
                # R_t gains c·Λ_t: remove its ∂_x and [q_0, ·] images from T
                R[t] = _add_slice(R.get(t, {}), _scale_slice(hv, c))
                corr = _scale_slice(hv, -c_x)
                if q0:
                    corr = _add_slice(corr, slice_bracket(m, q0, _scale_slice(hv, c)), -1)
                _, dY = solver.split(t, corr)
                Y = _add_slice(Y, dY)
        elif any(hc):
            raise ArithmeticError(f"non-vanishing ℋ component at degree {t}")
        if d >= dmin and Y:
            R[d] = Y
    R = {d: sl for d, sl in R.items() if d >= dmin and sl}
    elem = LoopElement.from_slices(m, R, dmin)
    return Resolvent(m, a, depth, R, dmin, elem)


# ---------------------------------------------------------------------------
# the scalar recursions for the two A2^(2) models


def _ops_sk():
    u0, u1, u2, u3 = (u(k) for k in range(4))

    def E1(b: DiffPoly) -> DiffPoly:
        return ((u0 * u1 - u3) * b * 2 + (u0 * u0 - u2 * 3) * b.dx() * 2
                - u1 * b.dxn(2) * 6 - u0 * b.dxn(3) * 4 + b.dxn(5) * 2)

    def E2(p: DiffPoly) -> DiffPoly:
        return u1 * p * 2 + u0 * p.dx() * 4 - p.dxn(3)

    return E1, E2


def _ops_kk():
    u0, u1, u2, u3 = (u(k) for k in range(4))

    def F1(p: DiffPoly) -> DiffPoly:
        return ((u0 * u1 * 8 - u3) * p * 2 + (u0 * u0 * 16 - u2 * 9) * p.dx()
                - u1 * p.dxn(2) * 15 - u0 * p.dxn(3) * 10 + p.dxn(5))

    def F2(b: DiffPoly) -> DiffPoly:
        return u1 * b * 2 + u0 * b.dx() * 4 - b.dxn(3) * 2

    return F1, F2


def scalar_recursion(model_name: str, a: int, lowest: int) -> Tuple[Dict[int, DiffPoly], Dict[int, DiffPoly]]:
    """(b1, p) coefficient maps λ-exponent -> DiffPoly down to exponent ``lowest``."""
    b1: Dict[int, DiffPoly] = {}
    p: Dict[int, DiffPoly] = {}
    if model_name == "sk":
        E1, E2 = _ops_sk()
        # p_[s-3] = -1/9 ∫E1(b1_[s]);  b1_[s-1] = -1/6 ∫E2(p_[s])
        if a == 1:
            p[0] = ONE
            s, which = 0, "p"
        else:
            b1[3] = ONE
            s, which = 3, "b"
        while True:
            if which == "p":
                nxt = s - 1
                if nxt < lowest:
                    break
                b1[nxt] = integrate_x(E2(p[s])).scale(Fraction(-1, 6))
                s, which = nxt, "b"
            else:
                nxt = s - 3
                if nxt < lowest:
                    break
                p[nxt] = integrate_x(E1(b1[s])).scale(Fraction(-1, 9))
                s, which = nxt, "p"
    elif model_name == "kk":
        F1, F2 = _ops_kk()
        # b1_[s-1] = -1/18 ∫F1(p_[s]);  p_[s-1] = -1/3 ∫F2(b1_[s])
        if a == 1:
            b1[0] = ONE
            s, which = 0, "b"
        else:
            p[1] = ONE
            s, which = 1, "p"
        while True:
            nxt = s - 1
            if nxt < lowest:
                break
            if which == "p":
                b1[nxt] = integrate_x(F1(p[s])).scale(Fraction(-1, 18))
                s, which = nxt, "b"
            else:
                p[nxt] = integrate_x(F2(b1[s])).scale(Fraction(-1, 3))
                s, which = nxt, "p"
    else:
        raise ValueError(f"no scalar recursion for model {model_name!r}")
    return b1, p


def _ser(d: Dict[int, DiffPoly]) -> LaurentSeries:
    return LaurentSeries(dict(d))


def model_specific_oracle(L: LaxOperator, a: int, depth: int) -> Resolvent:
    """Resolvent from the two-unknown scalar recursion plus closed-form slots."""
    m = L.model
    if m.name not in ("sk", "kk"):
        raise ValueError("oracle only available for sk and kk")
    if set(L.q) != {m.gauge_V[0][0]}:
        raise ValueError("oracle needs the canonical gauge")
    dmin = min_degree_for_depth(m, depth)
    # generous margin: closed forms shift exponents by up to two powers of λ
    lowest = -m.N * (depth + 2)
    b1d, pd = scalar_recursion(m.name, a, lowest)
    b1, p = _ser(b1d), _ser(pd)
    uu = LaurentSeries({0: u(0)})
    ux = LaurentSeries({0: u(1)})
    u2 = LaurentSeries({0: u(2)})

    def D(s: LaurentSeries, n: int = 1) -> LaurentSeries:
        return s.map(lambda c: c.dxn(n))

    lam = LaurentSeries({1: ONE})
    half, third, sixth = Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)
    if m.name == "sk":
        parts = {
            "a1": D(p).scale(half),
            "a2": (uu * b1 - D(b1, 2)).scale(third).shift(-1),
            "b1": b1,
            "b2": (uu * D(b1) + ux * b1 - D(b1, 3)).scale(third).shift(-2),
            "p": p,
            "c1": p * lam - (ux * D(b1)).scale(2 * third).shift(-2)
            - (uu * D(b1, 2) + b1 * u2 - D(b1, 4)).scale(third).shift(-2),
            "c2": D(b1),
            "r": b1 * lam + uu * p - D(p, 2).scale(half),
        }
    else:
        parts = {
            "a1": D(b1),
            "a2": (uu * p).scale(-third) + D(p, 2).scale(sixth),
            "b1": b1,
            "b2": D(p).scale(half),
            "p": p,
            "c1": uu * b1 + p * lam - D(b1, 2),
            "c2": (ux * p).scale(third) + (uu * D(p)).scale(Fraction(5, 6)) - D(p, 3).scale(sixth),
            "r": b1 * lam + ((uu * uu).scale(3) - u2).scale(third) * p
            - (ux * D(p)).scale(Fraction(7, 6)) - (uu * D(p, 2)).scale(Fraction(4, 3))
            + D(p, 4).scale(sixth),
        }
    elem = LoopElement(m, parts)
    # restrict to the principal-degree window of the generic solver
    slices = {d: sl for d, sl in elem.slices().items() if d >= dmin}
    elem = LoopElement.from_slices(m, slices, dmin)
    return Resolvent(m, a, depth, slices, dmin, elem)


# ---------------------------------------------------------------------------
# dressing


@dataclass
class DressingPair:
    model: HierarchyModel
    U: Dict[int, Slice]
    H: Dict[Tuple[int, int], DiffPoly]  # (b, l) -> H_{b,l}
    min_degree: int

    def U_element(self) -> LoopElement:
        return LoopElement.from_slices(self.model, self.U, self.min_degree)

    def H_element(self) -> LoopElement:
        m = self.model
        sl: Dict[int, Slice] = {}
        for (b, l), c in self.H.items():
            d = m.exponent_index(b) - m.rh * (l + 1)
            for hv in m.heisenberg_slice(d):
                sl[d] = _add_slice(sl.get(d, {}), {s: c * v for s, v in hv.items()})
        return LoopElement.from_slices(m, sl, self.min_degree + 1)


def dressing(L: LaxOperator, depth: int) -> DressingPair:
    """Find U in (im ad Λ)^{<0} and H in ℋ^{<0} with e^{ad U}ℒ = ∂ + Λ + H.

    With A_k = ad_U^k(Λ+q)/k! and B_k = ad_U^{k-1}(U_x)/k!, the degree-d part
    of e^{ad U}ℒ - ∂ is Σ A_k - Σ B_k.  Its only dependence on U_{d-1} is the
    term [U_{d-1}, Λ], so splitting the rest gives H_d and U_{d-1} at once.
    """
    if depth < 1:
        raise InsufficientDepth("depth must be at least 1")
    m = L.model
    solver = m.ad_lambda_solver
    dmin = -m.rh * depth - max(m.exponents)
    X: Dict[int, Slice] = {1: {s: DiffPoly.const(c) for s, c in m.Lambda(1).slices()[1].items()}}
    for d, sl in L.q_slices().items():
        X[d] = _add_slice(X.get(d, {}), sl)
    U: Dict[int, Slice] = {}
    A: List[Dict[int, Slice]] = [X]  # A[k][e]
    B: List[Dict[int, Slice]] = [{}]  # B[k][e], k >= 1
    H: Dict[Tuple[int, int], DiffPoly] = {}
    lam_slice = X[1]

    def ensure(k: int):
        while len(A) <= k:
            A.append({})
        while len(B) <= k:
            B.append({})

    for d in range(0, dmin - 1, -1):
        kmax = 2 - d
        ensure(kmax)
        total: Slice = dict(X.get(d, {}))
        for k in range(1, kmax + 1):
            # A_k at degree d from U_j (j <= -1, j >= d) and A_{k-1} at d - j
            acc: Slice = {}
            for j, Uj in U.items():
                src = A[k - 1].get(d - j)
                if src:
                    acc = _add_slice(acc, slice_bracket(m, Uj, src))
            if acc:
                acc = _scale_slice(acc, Fraction(1, k))
                A[k][d] = acc
                total = _add_slice(total, acc)
            if k == 1:
                Bk: Slice = {s: c.dx() for s, c in U.get(d, {}).items()}
            else:
                Bk = {}
                for j, Uj in U.items():
                    src = B[k - 1].get(d - j)
                    if src:
                        Bk = _add_slice(Bk, slice_bracket(m, Uj, src))
                Bk = _scale_slice(Bk, Fraction(1, k))
            if Bk:
                B[k][d] = Bk
                total = _add_slice(total, Bk, -1)
        hc, Y = solver.split(d, total)
        if any(hc):
            b = _exponent_slot(m, d)
            H[(b, (m.exponent_index(b) - d) // m.rh - 1)] = hc[0]
        if Y and d - 1 >= dmin:
            U[d - 1] = Y
            # [U_{d-1}, Λ] joins A_1 at degree d
            A[1][d] = _add_slice(A[1].get(d, {}), slice_bracket(m, Y, lam_slice))
    return DressingPair(m, U, H, dmin)


def _exponent_slot(m: HierarchyModel, d: int) -> int:
    for b, mb in enumerate(m.exponents, start=1):
        if (d - mb) % m.rh == 0:
            return b
    raise ValueError(f"no Heisenberg element at degree {d}")


def dressing_depth(dp: DressingPair) -> int:
    """Number of λ^{-N} orders of every g_a covered by the dressing window."""
    m = dp.model
    k = 0
    while all(m.exponent_index(b) - m.rh * (k + 1) >= dp.min_degree for b in range(1, m.n + 1)):
        k += 1
    return k


def hamiltonian_density_series(dp: DressingPair, a: int) -> LaurentSeries:
    """g_a(λ) = Σ_k h_{a,k} λ^{-kN} with h_{a,k} = h·H_{n+1-a,k}."""
    m = dp.model
    b = m.n + 1 - a
    K = dressing_depth(dp)
    coeffs = {-l * m.N: c.scale(m.h) for (bb, l), c in dp.H.items() if bb == b and l < K}
    return LaurentSeries(coeffs, -m.N * (K - 1))


def dressing_defect(L: LaxOperator, dp: DressingPair) -> LoopElement:
    """e^{ad U}(∂ + Λ + q) - ∂ - Λ - H, recomputed independently on the window.

    Works on principal-degree slices: ad U lowers the degree by at least one,
    so every series is cut at the first degree not fixed by the window.
    """
    m = L.model
    lo = dp.min_degree + 1

    def ad_u(x: Dict[int, Slice], c) -> Dict[int, Slice]:
        out: Dict[int, Slice] = {}
        for j, Uj in dp.U.items():
            for e, xe in x.items():
                if j + e >= lo:
                    out[j + e] = _add_slice(out.get(j + e, {}), slice_bracket(m, Uj, xe), c)
        return {d: sl for d, sl in out.items() if any(sl.values())}

    X: Dict[int, Slice] = {1: {s: DiffPoly.const(c) for s, c in m.Lambda(1).slices()[1].items()}}
    for d, sl in L.q_slices().items():
        X[d] = _add_slice(X.get(d, {}), sl)
    total = dict(X)
    term = X
    k = 1
    while term:
        term = ad_u(term, Fraction(1, k))
        for d, sl in term.items():
            total[d] = _add_slice(total.get(d, {}), sl)
        k += 1
    term = {d: {s: c.dx() for s, c in sl.items()} for d, sl in dp.U.items() if d >= lo}
    k = 1
    while term:
        for d, sl in term.items():
            total[d] = _add_slice(total.get(d, {}), sl, Fraction(-1))
        k += 1
        term = ad_u(term, Fraction(1, k))
    total[1] = _add_slice(total.get(1, {}), X[1], Fraction(-1))
    out = LoopElement.from_slices(m, total, lo)
    return out - dp.H_element()


def _fact(k: int) -> int:
    r = 1
    for i in range(2, k + 1):
        r *= i
    return r
