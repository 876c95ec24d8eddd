"""Truncated Laurent series in λ⁻¹ with explicit validity windows.

A series stores finitely many coefficients together with a floor ``L``:
every exponent ``>= L`` is known exactly, exponents below ``L`` are an unknown
tail.  ``floor=None`` marks an exact (finite) series.  Coefficients may be any
exact commutative ring element whose truthiness means "nonzero"
(``Fraction``, :class:`~mrtau.exactalg.DiffPoly`).
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Dict, Iterable, Optional, Tuple

from .exactalg import DiffPoly


class NotDivisible(ArithmeticError):
    """Raised when an exact division leaves a nonzero remainder."""


class OutOfWindow(LookupError):
    """Raised when a coefficient below the validity floor is requested."""


def _max_floor(*fs: Optional[int]) -> Optional[int]:
    vals = [f for f in fs if f is not None]
    return max(vals) if vals else None


def coeff_to_json(c):
    if isinstance(c, DiffPoly):
        return c.to_json()
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, int):
        return str(c)
    raise TypeError(f"no JSON rendering for {type(c).__name__}")


class LaurentSeries:
    """Univariate truncated Laurent series Σ c_k λ^k."""

    __slots__ = ("coeffs", "floor")

    def __init__(self, coeffs: Optional[Dict[int, object]] = None, floor: Optional[int] = None):
        self.floor = floor
        self.coeffs = {
            k: c for k, c in (coeffs or {}).items() if c and (floor is None or k >= floor)
        }

    # -- helpers -------------------------------------------------------------
    @classmethod
    def monomial(cls, c, k: int = 0) -> "LaurentSeries":
        return cls({k: c})

    def top(self) -> Optional[int]:
        """Largest exponent that may be nonzero, including the unknown tail."""
        t = max(self.coeffs, default=None)
        if self.floor is not None:
            t = self.floor - 1 if t is None else max(t, self.floor - 1)
        return t

    def is_exact(self) -> bool:
        return self.floor is None

    def is_zero(self) -> bool:
        """Known part is zero (the tail may still be unknown)."""
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __getitem__(self, k: int):
        return self.coefficient(k)

    def coefficient(self, k: int, zero=0):
        if self.floor is not None and k < self.floor:
            raise OutOfWindow(f"exponent {k} below floor {self.floor}")
        return self.coeffs.get(k, zero)

    def exponents(self) -> Tuple[int, ...]:
        return tuple(sorted(self.coeffs, reverse=True))

    def items(self):
        return sorted(self.coeffs.items(), reverse=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.floor == other.floor and self.coeffs == other.coeffs

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Equality on the common validity window."""
        f = _max_floor(self.floor, other.floor)
        a = self.truncate(f) if f is not None else self
        b = other.truncate(f) if f is not None else other
        return a.coeffs == b.coeffs

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*λ^{k}" for k, c in self.items()) or "0"
        tail = "" if self.floor is None else f" + O(λ^{self.floor - 1})"
        return f"LaurentSeries({body}{tail})"

    # -- arithmetic -------------------------------------------------------------
    def truncate(self, floor: int) -> "LaurentSeries":
        """Forget everything below ``floor`` (never lowers an existing floor)."""
        f = floor if self.floor is None else max(floor, self.floor)
        return LaurentSeries(self.coeffs, f)

    def __add__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries({0: other})
        f = _max_floor(self.floor, other.floor)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentSeries(out, f)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries({k: -c for k, c in self.coeffs.items()}, self.floor)

    def __sub__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries({0: other})
        return self + (-other)

    def scale(self, s) -> "LaurentSeries":
        return LaurentSeries({k: c * s for k, c in self.coeffs.items()}, self.floor)

    def __mul__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        floor = product_floor(self, other)
        out: Dict[int, object] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                if floor is not None and k < floor:
                    continue
                p = a * b
                out[k] = out[k] + p if k in out else p
        return LaurentSeries(out, floor)

    def __rmul__(self, other) -> "LaurentSeries":
        return self.scale(other)

    def shift(self, n: int) -> "LaurentSeries":
        """Multiply by λ^n."""
        return LaurentSeries(
            {k + n: c for k, c in self.coeffs.items()},
            None if self.floor is None else self.floor + n,
        )

    def map(self, fn: Callable) -> "LaurentSeries":
        return LaurentSeries({k: fn(c) for k, c in self.coeffs.items()}, self.floor)

    def d_lambda(self) -> "LaurentSeries":
        """Formal derivative in λ."""
        return LaurentSeries(
            {k - 1: c * k for k, c in self.coeffs.items() if k},
            None if self.floor is None else self.floor - 1,
        )

    # -- rendering ---------------------------------------------------------------
    def to_json(self, coeff_json: Callable = coeff_to_json) -> dict:
        return {"floor": self.floor, "terms": [[k, coeff_json(c)] for k, c in self.items()]}

    @classmethod
    def from_json(cls, data: dict, coeff_parse: Callable = None) -> "LaurentSeries":
        parse = coeff_parse or DiffPoly.from_json
        return cls({int(k): parse(c) for k, c in data["terms"]}, data["floor"])


def product_floor(a: LaurentSeries, b: LaurentSeries) -> Optional[int]:
    """Lowest exponent of a*b not polluted by either unknown tail."""
    if a.floor is None and b.floor is None:
        return None
    cands = []
    if a.floor is not None:
        tb = b.top()
        if tb is not None:
            cands.append(a.floor + tb)
    if b.floor is not None:
        ta = a.top()
        if ta is not None:
            cands.append(b.floor + ta)
    if not cands:
        # both sides carry no information at all
        return a.floor if a.floor is not None else b.floor
    return max(cands)


def project_pi(f: LaurentSeries, N: int) -> LaurentSeries:
    """Keep the terms λ^k with k < 0 and k ≡ -1 (mod N)."""
    if f.floor is not None and f.floor > -1:
        raise OutOfWindow("projection needs the λ^-1 coefficient to be known")
    return LaurentSeries(
        {k: c for k, c in f.coeffs.items() if k < 0 and (k + 1) % N == 0}, f.floor
    )


def residue(f: LaurentSeries, zero=0):
    """Coefficient of λ^-1."""
    return f.coefficient(-1, zero)


def plus_minus_split(f: LaurentSeries) -> Tuple[LaurentSeries, LaurentSeries]:
    plus = LaurentSeries({k: c for k, c in f.coeffs.items() if k >= 0})
    minus = LaurentSeries({k: c for k, c in f.coeffs.items() if k < 0}, f.floor)
    if f.floor is not None and f.floor > 0:
        plus = plus.truncate(f.floor)
    return plus, minus


# ---------------------------------------------------------------------------
# several spectral variables


Exps = Tuple[int, ...]


class MultiLaurent:
    """Laurent series in λ_1..λ_n with a validity floor on total degree.

    Every monomial whose total degree is ``>= floor`` is known; the others are
    not stored.  Total degree is the natural grading because each
    total-degree slice of the objects built here is a finite sum, which lets
    exact division work slice by slice.  ``degrees`` optionally restricts the
    known part to a set of total degrees, for consumers that only need a few
    slices.
    """

    __slots__ = ("nvars", "coeffs", "floor", "degrees")

    def __init__(self, nvars: int, coeffs: Optional[Dict[Exps, object]] = None,
                 floor: Optional[int] = None, degrees: Optional[Iterable[int]] = None):
        self.nvars = nvars
        self.floor = floor
        self.degrees = None if degrees is None else frozenset(degrees)
        self.coeffs = {
            e: c for e, c in (coeffs or {}).items() if c and self._known(sum(e))
        }

    def _known(self, d: int) -> bool:
        if self.floor is not None and d < self.floor:
            return False
        return self.degrees is None or d in self.degrees

    @classmethod
    def tensor(cls, factors: Iterable[LaurentSeries],
               degrees: Optional[Iterable[int]] = None) -> "MultiLaurent":
        """Product f_1(λ_1) f_2(λ_2) ... with the guaranteed total-degree floor."""
        factors = list(factors)
        n = len(factors)
        tops = [f.top() for f in factors]
        if any(t is None for t in tops):
            return cls(n, degrees=degrees)
        floor = None
        for i, f in enumerate(factors):
            if f.floor is not None:
                cand = f.floor + sum(t for j, t in enumerate(tops) if j != i)
                floor = cand if floor is None else max(floor, cand)
        want = None if degrees is None else frozenset(degrees)
        out: Dict[Exps, object] = {}
        items = [sorted(f.coeffs.items()) for f in factors]
        last = factors[-1].coeffs
        for combo in iproduct(*items[:-1]):
            e0 = tuple(k for k, _ in combo)
            s0 = sum(e0)
            if want is not None:
                # the last exponent is fixed by the requested total degree
                cands = [(d - s0, last.get(d - s0)) for d in want]
                cands = [(k, c) for k, c in cands if c is not None]
            else:
                cands = list(last.items())
            for k, x in cands:
                if floor is not None and s0 + k < floor:
                    continue
                c = x
                for _, y in combo:
                    c = y * c
                e = e0 + (k,)
                out[e] = out[e] + c if e in out else c
        return cls(n, out, floor, want)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiLaurent):
            return NotImplemented
        return ((self.nvars, self.floor, self.degrees, self.coeffs)
                == (other.nvars, other.floor, other.degrees, other.coeffs))

    def __repr__(self) -> str:
        return f"MultiLaurent(n={self.nvars}, terms={len(self.coeffs)}, floor={self.floor})"

    def coefficient(self, exps: Exps, zero=0):
        if not self._known(sum(exps)):
            raise OutOfWindow(f"exponents {tuple(exps)} outside the known window")
        return self.coeffs.get(tuple(exps), zero)

    def truncate(self, floor: int) -> "MultiLaurent":
        f = floor if self.floor is None else max(floor, self.floor)
        return MultiLaurent(self.nvars, self.coeffs, f, self.degrees)

    def _derived(self, coeffs, floor=..., degrees=...) -> "MultiLaurent":
        return MultiLaurent(self.nvars, coeffs,
                            self.floor if floor is ... else floor,
                            self.degrees if degrees is ... else degrees)

    def __add__(self, other: "MultiLaurent") -> "MultiLaurent":
        f = _max_floor(self.floor, other.floor)
        if self.degrees is None:
            degs = other.degrees
        elif other.degrees is None:
            degs = self.degrees
        else:
            degs = self.degrees & other.degrees
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return MultiLaurent(self.nvars, out, f, degs)

    def __neg__(self) -> "MultiLaurent":
        return self._derived({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "MultiLaurent") -> "MultiLaurent":
        return self + (-other)

    def scale(self, s) -> "MultiLaurent":
        return self._derived({e: c * s for e, c in self.coeffs.items()})

    def map(self, fn: Callable) -> "MultiLaurent":
        return self._derived({e: fn(c) for e, c in self.coeffs.items()})

    def mul_exact(self, other: "MultiLaurent") -> "MultiLaurent":
        """Product with an exact polynomial multiplier such as a denominator."""
        if other.floor is not None or other.degrees is not None:
            if self.floor is None and self.degrees is None:
                return other.mul_exact(self)
            raise ValueError("mul_exact needs one exact factor")
        tops = {sum(e) for e in other.coeffs}
        if len(tops) > 1 and self.degrees is not None:
            raise ValueError("slice-restricted series times an inhomogeneous polynomial")
        top = max(tops, default=0)
        floor = None if self.floor is None else self.floor + top
        degs = None if self.degrees is None else {d + top for d in self.degrees}
        out: Dict[Exps, object] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if floor is not None and sum(e) < floor:
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return MultiLaurent(self.nvars, out, floor, degs)

    def swap(self, i: int, j: int) -> "MultiLaurent":
        def sw(e):
            e = list(e)
            e[i], e[j] = e[j], e[i]
            return tuple(e)
        return self._derived({sw(e): c for e, c in self.coeffs.items()})

    def to_json(self, coeff_json: Callable = coeff_to_json) -> dict:
        items = sorted(self.coeffs.items(), key=lambda ec: tuple(-x for x in ec[0]))
        return {"floor": self.floor, "terms": [[list(e), coeff_json(c)] for e, c in items]}


def difference(nvars: int, i: int, j: int) -> MultiLaurent:
    """The exact polynomial λ_i - λ_j."""
    ei = tuple(1 if k == i else 0 for k in range(nvars))
    ej = tuple(1 if k == j else 0 for k in range(nvars))
    return MultiLaurent(nvars, {ei: Fraction(1), ej: Fraction(-1)})


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _sub(a, b):
    if b is None:
        return a
    return -b if a is None else a - b


def _divide_univariate(c: Dict[int, object], from_top: bool) -> Dict[int, object]:
    """Quotient of Σ c_i t^i by (t - 1); raises NotDivisible on a remainder.

    With q the quotient, c_i = q_{i-1} - q_i, solved either downward from the
    top exponent or upward from the bottom one.
    """
    if not c:
        return {}
    lo, hi = min(c), max(c)
    q: Dict[int, object] = {}
    acc = None
    if from_top:
        for i in range(hi, lo, -1):
            acc = _add(acc, c.get(i))
            q[i - 1] = acc
        rem = _add(acc, c.get(lo))
    else:
        for i in range(lo, hi):
            acc = _sub(acc, c.get(i))
            q[i] = acc
        rem = _sub(acc, c.get(hi))
    if rem is not None and rem:
        raise NotDivisible("nonzero remainder in slice division")
    return {k: v for k, v in q.items() if v is not None and v}


def divide_by_difference(f: MultiLaurent, i: int, j: int, from_top: bool = True) -> MultiLaurent:
    """Exact quotient f / (λ_i - λ_j).

    Monomials are grouped by total degree and by the exponents of the other
    variables; each group is a finite Laurent polynomial in t = λ_i/λ_j and is
    divided by (t - 1).  ``from_top`` selects the expansion direction
    (|λ_i| > |λ_j| versus the opposite); both agree whenever f is divisible.
    """
    groups: Dict[Tuple, Dict[int, object]] = {}
    for e, c in f.coeffs.items():
        rest = tuple(x for k, x in enumerate(e) if k not in (i, j))
        key = (sum(e), rest)
        groups.setdefault(key, {})[e[i]] = c
    out: Dict[Exps, object] = {}
    for (d, rest), cs in groups.items():
        q = _divide_univariate(cs, from_top)
        for a, c in q.items():
            e = [0] * f.nvars
            it = iter(rest)
            for k in range(f.nvars):
                if k not in (i, j):
                    e[k] = next(it)
            e[i] = a
            e[j] = d - 1 - a - sum(rest)
            out[tuple(e)] = c
    return MultiLaurent(f.nvars, out, None if f.floor is None else f.floor - 1,
                        None if f.degrees is None else {d - 1 for d in f.degrees})


def exact_divide_diagonal(f: MultiLaurent, power: int, from_top: bool = True) -> MultiLaurent:
    """Exact quotient f / (λ - μ)^power for a bivariate series."""
    if f.nvars != 2:
        raise ValueError("diagonal division expects two variables")
    g = f
    for _ in range(power):
        g = divide_by_difference(g, 0, 1, from_top)
    return g


def exact_divide_multidiag(f: MultiLaurent, pairs: Iterable[Tuple[int, int]],
                           from_top: bool = True) -> MultiLaurent:
    """Exact quotient of f by Π (λ_i - λ_j) over the given index pairs."""
    g = f
    for i, j in pairs:
        g = divide_by_difference(g, i, j, from_top)
    return g


def project_pi_multi(f: MultiLaurent, N: int, variables: Optional[Iterable[int]] = None
                     ) -> MultiLaurent:
    """π in the chosen variables (default all): exponents negative and ≡ -1 (mod N)."""
    vs = range(f.nvars) if variables is None else tuple(variables)
    return f._derived(
        {e: c for e, c in f.coeffs.items() if all(e[k] < 0 and (e[k] + 1) % N == 0 for k in vs)}
    )
