"""Scalar pseudodifferential operators: composition, fractional powers, residues."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

from .exactalg import ONE, ZERO, DiffPoly, u


class NonMonic(ValueError):
    pass


def gbinom(n: int, k: int) -> Fraction:
    """Generalized binomial C(n, k) for any integer n and k >= 0."""
    out = Fraction(1)
    for i in range(k):
        out = out * (n - i) / (i + 1)
    return out


@dataclass(frozen=True)
class PsiDO:
    """Σ_i a_i ∂^i with every order >= floor known (floor None: exact)."""

    coeffs: Dict[int, DiffPoly]
    floor: Optional[int] = None

    def __post_init__(self):
        cs = {i: c for i, c in self.coeffs.items() if c and (self.floor is None or i >= self.floor)}
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def d(cls, n: int = 1) -> "PsiDO":
        return cls({n: ONE}, None if n >= 0 else None)

    @classmethod
    def mult(cls, f: DiffPoly) -> "PsiDO":
        return cls({0: f})

    @property
    def order(self) -> Optional[int]:
        return max(self.coeffs, default=None)

    def top(self) -> Optional[int]:
        if self.coeffs:
            return max(self.coeffs)
        return None if self.floor is None else self.floor - 1

    def coefficient(self, i: int) -> DiffPoly:
        if self.floor is not None and i < self.floor:
            raise ValueError(f"order {i} is below the known window")
        return self.coeffs.get(i, ZERO)

    def truncate(self, floor: int) -> "PsiDO":
        f = floor if self.floor is None else max(floor, self.floor)
        return PsiDO(self.coeffs, f)

    def __add__(self, other: "PsiDO") -> "PsiDO":
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out[i] + c if i in out else c
        fl = [f for f in (self.floor, other.floor) if f is not None]
        return PsiDO(out, max(fl) if fl else None)

    def __neg__(self) -> "PsiDO":
        return PsiDO({i: -c for i, c in self.coeffs.items()}, self.floor)

    def __sub__(self, other: "PsiDO") -> "PsiDO":
        return self + (-other)

    def scale(self, c) -> "PsiDO":
        return PsiDO({i: a.scale(c) for i, a in self.coeffs.items()}, self.floor)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PsiDO):
            return NotImplemented
        return self.floor == other.floor and self.coeffs == other.coeffs

    def __mul__(self, other: "PsiDO") -> "PsiDO":
        return compose(self, other)

    def agrees_with(self, other: "PsiDO") -> bool:
        """Equality on the common known window."""
        fl = [f for f in (self.floor, other.floor) if f is not None]
        lo = max(fl) if fl else None
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeffs.get(i, ZERO) == other.coeffs.get(i, ZERO)
                   for i in keys if lo is None or i >= lo)

    def to_text(self) -> str:
        parts = [f"({c.to_text()})*D^{i}" for i, c in sorted(self.coeffs.items(), reverse=True)]
        body = " + ".join(parts) if parts else "0"
        return body if self.floor is None else f"{body} + O(D^{self.floor - 1})"


def _product_floor(A: PsiDO, B: PsiDO) -> Optional[int]:
    ta, tb = A.top(), B.top()
    cands = []
    if A.floor is not None and tb is not None:
        cands.append(A.floor + tb)
    if B.floor is not None and ta is not None:
        cands.append(B.floor + ta)
    return max(cands) if cands else None


def compose(A: PsiDO, B: PsiDO) -> PsiDO:
    """A ∘ B with ∂^i ∘ f = Σ_l C(i, l) f^{(l)} ∂^{i-l}, truncated at the floor."""
    floor = _product_floor(A, B)
    if floor is None and any(i < 0 for i in A.coeffs) and B.coeffs:
        # ∂^{-k} ∘ f never terminates: an exact product needs constant right factors
        if any(c.jets() for c in B.coeffs.values()):
            raise ValueError("exact composition with a negative-order left factor")
    out: Dict[int, DiffPoly] = {}
    for i, a in A.coeffs.items():
        for j, b in B.coeffs.items():
            l = 0
            bl = b
            while True:
                o = i + j - l
                if floor is not None and o < floor:
                    break
                if not bl:
                    break
                c = gbinom(i, l)
                if c:
                    term = (a * bl).scale(c)
                    out[o] = out[o] + term if o in out else term
                elif i >= 0 and l > i:
                    break
                l += 1
                bl = bl.dx()
    return PsiDO(out, floor)


def residue_psido(A: PsiDO) -> DiffPoly:
    """Coefficient of ∂^{-1}."""
    return A.coefficient(-1)


def nth_root(L: PsiDO, n: int, floor: int) -> PsiDO:
    """X = ∂ + Σ_{k>=1} x_k ∂^{1-k} with X^n = L, known down to order ``floor``.

    The ∂^{n-k} coefficient of X^n is n·x_k plus terms in x_1..x_{k-1}, so each
    x_k comes from one subtraction, no integration.
    """
    if L.order != n or L.coefficient(n) != ONE:
        raise NonMonic("expected a monic operator of the given order")
    X = {1: ONE}
    for k in range(1, 2 - floor):
        o = 1 - k
        lo = n - k
        cur = PsiDO(X, lo - n + 1)
        P = cur
        for _ in range(n - 1):
            P = compose(P, cur)
        have = P.coeffs.get(lo, ZERO)
        want = L.coeffs.get(lo, ZERO)
        xk = (want - have).scale(Fraction(1, n))
        if xk:
            X[o] = xk
    return PsiDO(X, floor)


def power(X: PsiDO, p: int) -> PsiDO:
    if p < 1:
        raise ValueError("positive integer power expected")
    out = X
    for _ in range(p - 1):
        out = compose(out, X)
    return out


def fractional_power(L: PsiDO, p: int, n: int, floor: int = -1) -> PsiDO:
    """L^{p/n} known down to order ``floor``.

    X^p has floor floor(X) + p - 1, so the root is taken down to floor - p + 1.
    """
    if p == 0:
        return PsiDO({0: ONE}, floor)
    X = nth_root(L, n, floor - p + 1)
    P = power(X, p)
    assert P.floor is not None and P.floor <= floor
    return P.truncate(floor)


# -- shipped scalar Lax operators -------------------------------------------------


def lax_operator(model_name: str) -> Tuple[PsiDO, int, Fraction]:
    """(L, n, c) with Ω_{a,k;1,0} = c·Res L^{(m_a + rh k)/n}."""
    U = u(0)
    if model_name == "sk":
        return PsiDO({3: ONE, 1: -U}), 3, Fraction(2)
    if model_name == "kk":
        return PsiDO({3: ONE, 1: U.scale(-2), 0: -U.dx()}), 3, Fraction(1)
    if model_name == "kdv":
        return PsiDO({2: ONE, 0: -U}), 2, Fraction(1)
    raise KeyError(f"no scalar Lax operator for {model_name!r}")


@lru_cache(maxsize=None)
def lax_residue(model_name: str, p: int) -> DiffPoly:
    """Res L^{p/n} for the shipped Lax operator of the model."""
    L, n, _ = lax_operator(model_name)
    return residue_psido(fractional_power(L, p, n))


def lax_residue_crosscheck(model, table, depth: Optional[int] = None):
    """Ω_{a,k;1,0} = c·Res L^{(m_a + rh k)/n} for all a and k <= depth."""
    from .taustruct import CheckReport

    rep = CheckReport(f"lax residues {model.name}", True)
    _, _, c = lax_operator(model.name)
    K = table.depth if depth is None else depth
    for a in range(1, model.n + 1):
        for k in range(K + 1):
            p = model.exponent_index(a) + model.rh * k
            rep.checked += 1
            if table.get(a, k, 1, 0) != lax_residue(model.name, p).scale(c):
                rep.fail(f"(a,k)=({a},{k})")
    return rep


def parse_power(text: str) -> Tuple[int, int]:
    """'5/3' -> (5, 3); '2' -> (2, 1)."""
    f = Fraction(text)
    return f.numerator, f.denominator
