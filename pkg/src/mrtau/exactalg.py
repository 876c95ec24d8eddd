"""Differential polynomials with exact rational coefficients.

A :class:`DiffPoly` is an element of Q[u_{s,k}], where u_{s,k} stands for the
k-th x-derivative of the s-th dependent variable.  Monomials are tuples of
``((s, k), e)`` pairs sorted by jet, so they hash and compare canonically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

Q = Fraction
Jet = Tuple[int, int]
Mono = Tuple[Tuple[Jet, int], ...]

ONE_MONO: Mono = ()
VAR_NAMES = ("u", "v", "w")


class NotExact(ArithmeticError):
    """Raised when a differential polynomial is not a total x-derivative."""


class NonHomogeneous(ValueError):
    """Raised when a polynomial has monomials of different weights."""


def _as_q(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        return Fraction(c)
    return Fraction(c)


def mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for j, e in m2:
        d[j] = d.get(j, 0) + e
    return tuple(sorted(d.items()))


def mono_jets(m: Mono) -> Tuple[Jet, ...]:
    """Jet list with multiplicity, sorted; used for canonical ordering."""
    out = []
    for j, e in m:
        out.extend([j] * e)
    return tuple(out)


@dataclass(frozen=True)
class WeightScheme:
    """Weight grading: weight(u_{s,k}) = base_weights[s] + k."""

    base_weights: Tuple[Fraction, ...] = (Fraction(2),)

    def jet_weight(self, jet: Jet) -> Fraction:
        s, k = jet
        return Fraction(self.base_weights[s]) + k

    def mono_weight(self, m: Mono) -> Fraction:
        return sum((self.jet_weight(j) * e for j, e in m), Fraction(0))


DEFAULT_WEIGHTS = WeightScheme()


def _sort_key(m: Mono):
    # weights beyond the default scheme's range fall back to weight 2
    w = sum(((2 + j[1]) * e for j, e in m), 0)
    return (w, mono_jets(m))


class DiffPoly:
    """Element of the differential polynomial ring over Q.

    Instances are treated as immutable; ``terms`` maps monomials to nonzero
    rationals.
    """

    __slots__ = ("terms", "_dx")

    def __init__(self, terms: Optional[Mapping[Mono, object]] = None):
        t: Dict[Mono, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = _as_q(c)
                if c:
                    t[m] = c
        self.terms = t
        self._dx = None

    @classmethod
    def _raw(cls, terms: Dict[Mono, Fraction]) -> "DiffPoly":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._dx = None
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({ONE_MONO: c})

    @classmethod
    def jet(cls, k: int = 0, s: int = 0) -> "DiffPoly":
        return cls._raw({(((s, k), 1),): Fraction(1)})

    # -- basic protocol -----------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == DiffPoly.const(other).terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"DiffPoly({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def __len__(self) -> int:
        return len(self.terms)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            if other == 0:
                return self
            other = DiffPoly.const(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m)
            if v is None:
                t[m] = c
            else:
                v += c
                if v:
                    t[m] = v
                else:
                    del t[m]
        return DiffPoly._raw(t)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "DiffPoly":
        return (-self) + other

    def scale(self, c) -> "DiffPoly":
        c = _as_q(c)
        if not c:
            return ZERO
        if c == 1:
            return self
        return DiffPoly._raw({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return ZERO
        if len(a) > len(b):
            a, b = b, a
        t: Dict[Mono, Fraction] = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = mono_mul(m1, m2)
                v = t.get(m)
                t[m] = c1 * c2 if v is None else v + c1 * c2
        return DiffPoly._raw({m: c for m, c in t.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, c) -> "DiffPoly":
        return self.scale(Fraction(1) / _as_q(c))

    def __pow__(self, n: int) -> "DiffPoly":
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    # -- structure ------------------------------------------------------------
    def constant_term(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def jets(self) -> set:
        return {j for m in self.terms for j, _ in m}

    def variables(self) -> set:
        return {j[0] for j in self.jets()}

    def max_order(self, s: Optional[int] = None) -> int:
        """Highest derivative order present (-1 if the variable is absent)."""
        orders = [k for (v, k) in self.jets() if s is None or v == s]
        return max(orders, default=-1)

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def partial(self, jet: Jet) -> "DiffPoly":
        """Partial derivative with respect to the jet variable ``jet``."""
        t: Dict[Mono, Fraction] = {}
        for m, c in self.terms.items():
            for i, (j, e) in enumerate(m):
                if j == jet:
                    if e == 1:
                        nm = m[:i] + m[i + 1:]
                    else:
                        nm = m[:i] + ((j, e - 1),) + m[i + 1:]
                    t[nm] = t.get(nm, 0) + c * e
                    break
        return DiffPoly._raw({m: c for m, c in t.items() if c})

    def coefficient_of(self, mono: Mono) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    # -- differential structure ------------------------------------------------
    def dx(self) -> "DiffPoly":
        """Total x-derivative (sends u_{s,k} to u_{s,k+1})."""
        if self._dx is not None:
            return self._dx
        t: Dict[Mono, Fraction] = {}
        for m, c in self.terms.items():
            for i, ((s, k), e) in enumerate(m):
                d = dict(m)
                if e == 1:
                    del d[(s, k)]
                else:
                    d[(s, k)] = e - 1
                nj = (s, k + 1)
                d[nj] = d.get(nj, 0) + 1
                nm = tuple(sorted(d.items()))
                v = t.get(nm)
                t[nm] = c * e if v is None else v + c * e
        self._dx = DiffPoly._raw({m: c for m, c in t.items() if c})
        return self._dx

    def dxn(self, n: int) -> "DiffPoly":
        f = self
        for _ in range(n):
            f = f.dx()
        return f

    def substitute(self, values: Mapping[int, "DiffPoly"]) -> "DiffPoly":
        """Replace u_{s,k} by d^k/dx^k values[s] for every s in ``values``."""
        derivs: Dict[Jet, DiffPoly] = {}

        def jet_value(j: Jet) -> DiffPoly:
            if j not in derivs:
                s, k = j
                derivs[j] = values[s] if k == 0 else jet_value((s, k - 1)).dx()
            return derivs[j]

        out = ZERO
        for m, c in self.terms.items():
            term = DiffPoly._raw({ONE_MONO: c})
            for j, e in m:
                if j[0] in values:
                    term = term * (jet_value(j) ** e)
                else:
                    term = term * DiffPoly._raw({((j, e),): Fraction(1)})
            out = out + term
        return out

    # -- rendering ------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: _sort_key(mc[0]))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = mono_text(m)
            if not mono:
                body = _q_text(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{_q_text(abs(c))}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def to_json(self) -> list:
        out = []
        for m, c in self.sorted_terms():
            mono = []
            for (s, k), e in m:
                mono.append([k, e] if s == 0 else [k, e, s])
            out.append({"coeff": _q_text(c), "mono": mono})
        return out

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "DiffPoly":
        t: Dict[Mono, Fraction] = {}
        for item in data:
            d = {}
            for entry in item["mono"]:
                k, e = entry[0], entry[1]
                s = entry[2] if len(entry) > 2 else 0
                d[(s, k)] = d.get((s, k), 0) + e
            m = tuple(sorted(d.items()))
            t[m] = t.get(m, Fraction(0)) + Fraction(item["coeff"])
        return cls(t)


def _q_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def jet_text(j: Jet) -> str:
    s, k = j
    name = VAR_NAMES[s] if s < len(VAR_NAMES) else f"u{s}"
    if k == 0:
        return name
    if k == 1:
        return f"{name}_x"
    return f"{name}_{k}x"


def mono_text(m: Mono) -> str:
    return "*".join(jet_text(j) if e == 1 else f"{jet_text(j)}^{e}" for j, e in m)


ZERO = DiffPoly._raw({})
ONE = DiffPoly._raw({ONE_MONO: Fraction(1)})
U = DiffPoly.jet(0)


def u(k: int = 0, s: int = 0) -> DiffPoly:
    """The jet variable u_{s,k} as a polynomial."""
    return DiffPoly.jet(k, s)


# ---------------------------------------------------------------------------
# operations on the ring

def total_x_derivative(f: DiffPoly) -> DiffPoly:
    return f.dx()


def variational_derivative(f: DiffPoly, s: int = 0) -> DiffPoly:
    """Euler operator: sum_k (-d/dx)^k df/du_{s,k}."""
    out = ZERO
    for k in range(f.max_order(s), -1, -1):
        # Horner in (-d/dx): out = df/du_k - d/dx(out_prev)
        out = f.partial((s, k)) - out.dx()
    return out


def is_total_derivative(f: DiffPoly) -> bool:
    if f.constant_term():
        return False
    return all(variational_derivative(f, s).is_zero() for s in f.variables())


def integrate_x(f: DiffPoly) -> DiffPoly:
    """Return g with zero constant term and dg/dx = f, or raise NotExact.

    Peels off the highest jet: an exact f is linear in its top-order jets,
    and the coefficient of u_{s,n} integrates in u_{s,n-1} to a piece of g.
    """
    if f.constant_term():
        raise NotExact("nonzero constant term")
    for s in f.variables():
        if variational_derivative(f, s):
            raise NotExact(f"variational derivative in var {s} is nonzero")
    rem = f
    g = ZERO
    guard = 0
    while rem:
        guard += 1
        if guard > 10_000:
            raise NotExact("integration did not terminate")
        n = rem.max_order()
        if n == 0:
            raise NotExact("residual has no derivatives")
        s = max(v for (v, k) in rem.jets() if k == n)
        top = (s, n)
        coeff = rem.partial(top)
        if top in coeff.jets():
            raise NotExact("nonlinear in top jet")
        piece = _antiderivative(coeff, (s, n - 1))
        g = g + piece
        rem = rem - piece.dx()
    return g


def _antiderivative(f: DiffPoly, jet: Jet) -> DiffPoly:
    """Polynomial antiderivative of f with respect to one jet variable."""
    t: Dict[Mono, Fraction] = {}
    for m, c in f.terms.items():
        d = dict(m)
        e = d.get(jet, 0) + 1
        d[jet] = e
        t[tuple(sorted(d.items()))] = c / e
    return DiffPoly._raw(t)


def weight_of(f: DiffPoly, scheme: WeightScheme = DEFAULT_WEIGHTS) -> Fraction:
    if f.is_zero():
        raise ValueError("weight of the zero polynomial is undefined")
    ws = {scheme.mono_weight(m) for m in f.terms}
    if len(ws) != 1:
        raise NonHomogeneous(f"weights {sorted(ws)}")
    return ws.pop()


def is_homogeneous(f: DiffPoly, scheme: WeightScheme = DEFAULT_WEIGHTS) -> bool:
    try:
        weight_of(f, scheme)
    except NonHomogeneous:
        return False
    return True


@dataclass
class FlowDerivation:
    """Evolutionary derivation d/dt with du_s/dt = rhs[s].

    Caches x-derivatives of the right-hand sides, which dominate the cost
    when the same flow is applied to many polynomials.
    """

    rhs: Mapping[int, DiffPoly]
    _cache: Dict[Jet, DiffPoly] = field(default_factory=dict, repr=False)

    def jet_rate(self, j: Jet) -> DiffPoly:
        if j not in self._cache:
            s, k = j
            if s not in self.rhs:
                raise KeyError(f"flow has no right-hand side for variable {s}")
            self._cache[j] = self.rhs[s] if k == 0 else self.jet_rate((s, k - 1)).dx()
        return self._cache[j]

    def __call__(self, f: DiffPoly) -> DiffPoly:
        out = ZERO
        for j in sorted(f.jets()):
            out = out + f.partial(j) * self.jet_rate(j)
        return out


def apply_flow_derivation(f: DiffPoly, rhs: Mapping[int, DiffPoly]) -> DiffPoly:
    return FlowDerivation(rhs)(f)
