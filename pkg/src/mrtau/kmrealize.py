"""Standard realizations of twisted loop algebras as σ-twisted matrix loops.

Elements of the loop algebra are stored in a fixed "slot" basis of g: each
slot is a traceless matrix, homogeneous for ad ρ^∨, whose λ-exponents are
restricted to one residue class modulo N.  The twist therefore becomes a
filter on exponents and all brackets and pairings reduce to rational
structure constants computed once per model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product as iproduct
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy

from .exactalg import ONE, ZERO, DiffPoly, WeightScheme, u
from .series import LaurentSeries, MultiLaurent

Matrix = Tuple[Tuple[Fraction, ...], ...]
# homogeneous component of a loop element: slot -> coefficient
Slice = Dict[str, object]


class ModelValidationError(ValueError):
    """Stored model data violates one of the structural invariants."""


class NonHomogeneousDegree(ValueError):
    """Element is not homogeneous for the principal gradation."""


class GaugeError(ValueError):
    """The gauge-fixing equation has no solution of the expected shape."""


# ---------------------------------------------------------------------------
# small matrix helpers (n <= 3, exact)


def E(n: int, i: int, j: int, c=1) -> Matrix:
    """Elementary matrix c*E_{ij} with 1-based indices."""
    return tuple(
        tuple(Fraction(c) if (a == i - 1 and b == j - 1) else Fraction(0) for b in range(n))
        for a in range(n)
    )


def madd(*ms: Matrix) -> Matrix:
    n = len(ms[0])
    return tuple(tuple(sum((m[i][j] for m in ms), Fraction(0)) for j in range(n)) for i in range(n))


def mscale(m: Matrix, c) -> Matrix:
    return tuple(tuple(x * c for x in row) for row in m)


def mmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n))
        for i in range(n)
    )


def mcomm(a: Matrix, b: Matrix) -> Matrix:
    return madd(mmul(a, b), mscale(mmul(b, a), -1))


def mtrace(a: Matrix) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def mzero(n: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))


# ---------------------------------------------------------------------------
# model data


@dataclass(frozen=True)
class Slot:
    name: str
    matrix: Matrix
    residue: int  # allowed λ-exponents k ≡ residue (mod N)


@dataclass(frozen=True)
class Generator:
    """A Chevalley generator c·X·λ^k given as slot coordinates at one λ-power."""

    matrix: Matrix
    power: int


@dataclass(frozen=True)
class HierarchyModel:
    """Static data of one (twisted affine algebra, vertex) pair."""

    name: str
    title: str
    n_g: int
    r: int
    h: int
    h_dual_g: int
    m_vertex: int
    a_m: int
    exponents: Tuple[int, ...]
    slots: Tuple[Slot, ...]
    rho: Tuple[Fraction, ...]
    cartan: Tuple[Tuple[int, ...], ...]
    chevalley: Mapping[str, Generator]
    # Λ_{m_a}: slot -> (coefficient, λ-power)
    heisenberg: Tuple[Mapping[str, Tuple[Fraction, int]], ...]
    borel: Tuple[str, ...]
    nilpotent: Tuple[str, ...]
    # q^can = Σ_s u_s · (coefficient * slot)
    gauge_V: Tuple[Tuple[str, Fraction], ...]
    hamiltonian_P: Optional[Tuple[DiffPoly, ...]] = None
    weight_scheme: WeightScheme = field(default_factory=WeightScheme)

    # -- scalar data ----------------------------------------------------------
    @property
    def N(self) -> int:
        return self.r * self.a_m

    @property
    def rh(self) -> int:
        return self.r * self.h

    @property
    def n(self) -> int:
        return len(self.exponents)

    @cached_property
    def slot_names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.slots)

    @cached_property
    def slot_index(self) -> Dict[str, int]:
        return {s.name: i for i, s in enumerate(self.slots)}

    @cached_property
    def slot_by_name(self) -> Dict[str, Slot]:
        return {s.name: s for s in self.slots}

    def exponent_index(self, a: int) -> int:
        """Exponent m_a for the 1-based index a."""
        if not 1 <= a <= self.n:
            raise IndexError("exponent index out of range")
        return self.exponents[a - 1]

    # -- structure constants ---------------------------------------------------
    @cached_property
    def delta(self) -> Dict[str, Fraction]:
        """ad ρ^∨ eigenvalue of each slot."""
        out = {}
        for s in self.slots:
            vals = {
                self.rho[i] - self.rho[j]
                for i in range(self.n_g)
                for j in range(self.n_g)
                if s.matrix[i][j]
            }
            if len(vals) != 1:
                raise ModelValidationError(f"slot {s.name} is not ad ρ-homogeneous")
            out[s.name] = vals.pop()
        return out

    @cached_property
    def _coord_solver(self):
        cols = [[x for row in s.matrix for x in row] for s in self.slots]
        A = sympy.Matrix(len(cols[0]), len(cols), lambda i, j: sympy.Rational(cols[j][i]))
        pinv = (A.T * A).inv() * A.T
        return A, pinv

    def coordinates(self, m: Matrix) -> Dict[str, Fraction]:
        """Slot coordinates of a matrix in g; raises if m is outside the span."""
        A, pinv = self._coord_solver
        v = sympy.Matrix([sympy.Rational(x) for row in m for x in row])
        c = pinv * v
        if A * c != v:
            raise ModelValidationError("matrix is not in the span of the slot basis")
        return {s.name: Fraction(int(x.p), int(x.q)) for s, x in zip(self.slots, c) if x != 0}

    @cached_property
    def structure(self) -> Dict[Tuple[str, str], Tuple[Tuple[str, Fraction], ...]]:
        """[slot_a, slot_b] = Σ c·slot_g, stored as ((g, c), ...)."""
        out = {}
        for a in self.slots:
            for b in self.slots:
                co = self.coordinates(mcomm(a.matrix, b.matrix))
                if co:
                    out[(a.name, b.name)] = tuple(sorted(co.items()))
        return out

    @cached_property
    def gram(self) -> Dict[Tuple[str, str], Fraction]:
        out = {}
        for a in self.slots:
            for b in self.slots:
                t = mtrace(mmul(a.matrix, b.matrix))
                if t:
                    out[(a.name, b.name)] = t
        return out

    @cached_property
    def ad_matrices(self) -> Dict[str, List[List[Fraction]]]:
        """Adjoint representation: ad(slot)[g][b] = coefficient of g in [slot, b]."""
        d = len(self.slots)
        out = {}
        for a in self.slots:
            M = [[Fraction(0)] * d for _ in range(d)]
            for j, b in enumerate(self.slots):
                for g, c in self.structure.get((a.name, b.name), ()):
                    M[self.slot_index[g]][j] = c
            out[a.name] = M
        return out

    def ad_trace(self, names: Sequence[str]) -> Fraction:
        """tr(ad x_1 ∘ ... ∘ ad x_k) for slot basis elements."""
        d = len(self.slots)
        M = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        for nm in names:
            A = self.ad_matrices[nm]
            M = [[sum((M[i][k] * A[k][j] for k in range(d) if M[i][k] and A[k][j]), Fraction(0))
                  for j in range(d)] for i in range(d)]
        return sum((M[i][i] for i in range(d)), Fraction(0))

    def ad_trace_tensor(self, k: int) -> Dict[Tuple[str, ...], Fraction]:
        cache = self.__dict__.setdefault("_ad_trace_cache", {})
        if k not in cache:
            out = {}
            for combo in iproduct(self.slot_names, repeat=k):
                t = self.ad_trace(combo)
                if t:
                    out[combo] = t
            cache[k] = out
        return cache[k]

    # -- gradation ---------------------------------------------------------------
    def slot_power(self, slot: str, degree: int) -> Optional[int]:
        """λ-power k of ``slot`` at principal degree ``degree`` (None if absent)."""
        k = (Fraction(degree) - self.delta[slot]) * self.N / self.rh
        if k.denominator != 1:
            return None
        k = int(k)
        if (k - self.slot_by_name[slot].residue) % self.N:
            return None
        return k

    def principal_degree_of(self, slot: str, k: int) -> Fraction:
        return self.delta[slot] + Fraction(k * self.rh, self.N)

    def slice_slots(self, degree: int) -> Tuple[str, ...]:
        return tuple(s for s in self.slot_names if self.slot_power(s, degree) is not None)

    def heisenberg_slice(self, degree: int) -> List[Slice]:
        """Basis of ℋ at principal degree ``degree`` as slot-coordinate slices."""
        out = []
        for a, m in enumerate(self.exponents):
            if (degree - m) % self.rh == 0:
                out.append({s: c for s, (c, _) in self.heisenberg[a].items()})
        return out

    def heisenberg_element(self, i: int) -> "LoopElement":
        """Λ_i = Λ_{m_a} λ^{kN} for i = m_a + rh·k."""
        for a, m in enumerate(self.exponents):
            if (i - m) % self.rh == 0:
                k = (i - m) // self.rh
                return LoopElement(self, {
                    s: LaurentSeries({p + k * self.N: c})
                    for s, (c, p) in self.heisenberg[a].items()
                })
        raise ValueError(f"{i} is not an exponent of {self.name}")

    def Lambda(self, a: int = 1) -> "LoopElement":
        return self.heisenberg_element(self.exponent_index(a))

    # -- derived pieces of the Lax operator ----------------------------------------
    def chevalley_element(self, name: str) -> "LoopElement":
        g = self.chevalley[name]
        return LoopElement(self, {
            s: LaurentSeries({g.power: c}) for s, c in self.coordinates(g.matrix).items()
        })

    @cached_property
    def e_tilde(self) -> Dict[str, Fraction]:
        """ẽ_m with e_m = ẽ_m λ^{deg}: slot coordinates of the λ^1 part of Λ."""
        g = self.chevalley[f"e{self.m_vertex}"]
        return self.coordinates(g.matrix)

    @cached_property
    def e_tilde_power(self) -> int:
        return self.chevalley[f"e{self.m_vertex}"].power

    @cached_property
    def e_principal(self) -> Dict[str, Fraction]:
        """e = Λ - e_m, the λ^0 part of Λ."""
        parts = [self.coordinates(g.matrix) for nm, g in self.chevalley.items()
                 if nm.startswith("e") and nm != f"e{self.m_vertex}"]
        out: Dict[str, Fraction] = {}
        for p in parts:
            for s, c in p.items():
                out[s] = out.get(s, Fraction(0)) + c
        return out

    def q_canonical(self) -> "LoopElement":
        """q^can = Σ_s u_s · v_s with the model's gauge slot."""
        terms: Dict[str, DiffPoly] = {}
        for s, (slot, c) in enumerate(self.gauge_V):
            terms[slot] = terms.get(slot, ZERO) + u(0, s).scale(c)
        return LoopElement(self, {k: LaurentSeries({0: v}) for k, v in terms.items()})

    @cached_property
    def ad_lambda_solver(self) -> "SliceSolver":
        return SliceSolver(self)

    def dump(self) -> dict:
        """Human-readable audit of all stored matrices."""
        def mj(m):
            return [[str(x) for x in row] for row in m]
        return {
            "name": self.name,
            "title": self.title,
            "n_g": self.n_g, "r": self.r, "h": self.h, "h_dual_g": self.h_dual_g,
            "m_vertex": self.m_vertex, "N": self.N, "exponents": list(self.exponents),
            "rho": [str(x) for x in self.rho],
            "cartan": [list(row) for row in self.cartan],
            "slots": [{"name": s.name, "residue": s.residue, "degree_offset": str(self.delta[s.name]),
                       "matrix": mj(s.matrix)} for s in self.slots],
            "chevalley": {k: {"matrix": mj(g.matrix), "lambda_power": g.power}
                          for k, g in self.chevalley.items()},
            "heisenberg": [{s: [str(c), p] for s, (c, p) in hz.items()} for hz in self.heisenberg],
            "borel": list(self.borel), "nilpotent": list(self.nilpotent),
            "gauge_V": [[s, str(c)] for s, c in self.gauge_V],
            "hamiltonian_P": None if self.hamiltonian_P is None
            else [p.to_text() for p in self.hamiltonian_P],
        }


# ---------------------------------------------------------------------------
# loop elements


class LoopElement:
    """Element of the twisted loop algebra: slot -> LaurentSeries of coefficients."""

    __slots__ = ("model", "parts")

    def __init__(self, model: HierarchyModel, parts: Mapping[str, LaurentSeries]):
        self.model = model
        self.parts = {s: p for s, p in parts.items() if p or p.floor is not None}

    @classmethod
    def from_slices(cls, model: HierarchyModel, slices: Mapping[int, Slice],
                    min_degree: Optional[int] = None) -> "LoopElement":
        """Assemble from principal-degree components; ``min_degree`` sets the window."""
        coeffs: Dict[str, Dict[int, object]] = {s: {} for s in model.slot_names}
        for d, sl in slices.items():
            for s, c in sl.items():
                k = model.slot_power(s, d)
                coeffs[s][k] = c
        parts = {}
        for s in model.slot_names:
            floor = None
            if min_degree is not None:
                floor = _slot_floor(model, s, min_degree)
            parts[s] = LaurentSeries(coeffs[s], floor)
        return cls(model, parts)

    def part(self, slot: str) -> LaurentSeries:
        p = self.parts.get(slot)
        if p is not None:
            return p
        floors = [q.floor for q in self.parts.values() if q.floor is not None]
        return LaurentSeries({}, None)

    def __getitem__(self, slot: str) -> LaurentSeries:
        return self.part(slot)

    def __add__(self, other: "LoopElement") -> "LoopElement":
        out = dict(self.parts)
        for s, p in other.parts.items():
            out[s] = out[s] + p if s in out else p
        return LoopElement(self.model, out)

    def __neg__(self) -> "LoopElement":
        return LoopElement(self.model, {s: -p for s, p in self.parts.items()})

    def __sub__(self, other: "LoopElement") -> "LoopElement":
        return self + (-other)

    def scale(self, c) -> "LoopElement":
        return LoopElement(self.model, {s: p.scale(c) for s, p in self.parts.items()})

    def shift(self, n: int) -> "LoopElement":
        return LoopElement(self.model, {s: p.shift(n) for s, p in self.parts.items()})

    def map(self, fn) -> "LoopElement":
        return LoopElement(self.model, {s: p.map(fn) for s, p in self.parts.items()})

    def dx(self) -> "LoopElement":
        return self.map(lambda c: c.dx())

    def d_lambda(self) -> "LoopElement":
        return LoopElement(self.model, {s: p.d_lambda() for s, p in self.parts.items()})

    def truncate(self, floor: int) -> "LoopElement":
        return LoopElement(self.model, {s: p.truncate(floor) for s, p in self.parts.items()})

    def is_zero(self) -> bool:
        return all(not p for p in self.parts.values())

    def agrees_with(self, other: "LoopElement") -> bool:
        names = set(self.parts) | set(other.parts)
        return all(self.part(s).agrees_with(other.part(s)) for s in names)

    def floors(self) -> Dict[str, Optional[int]]:
        return {s: p.floor for s, p in self.parts.items()}

    def matrix(self) -> List[List[LaurentSeries]]:
        """Matrix view: entries are LaurentSeries."""
        n = self.model.n_g
        out = [[LaurentSeries() for _ in range(n)] for _ in range(n)]
        for s, p in self.parts.items():
            m = self.model.slot_by_name[s].matrix
            for i in range(n):
                for j in range(n):
                    if m[i][j]:
                        out[i][j] = out[i][j] + p.scale(m[i][j])
        return out

    def principal_degree(self) -> Fraction:
        degs = {self.model.principal_degree_of(s, k) for s, p in self.parts.items() for k in p.coeffs}
        if len(degs) != 1:
            raise NonHomogeneousDegree(f"degrees {sorted(degs)}")
        return degs.pop()

    def slices(self) -> Dict[int, Slice]:
        """Split the known terms into principal-degree components."""
        out: Dict[int, Slice] = {}
        for s, p in self.parts.items():
            for k, c in p.coeffs.items():
                d = self.model.principal_degree_of(s, k)
                out.setdefault(int(d), {})[s] = c
        return out

    def to_json(self) -> dict:
        return {s: self.parts[s].to_json() for s in self.model.slot_names if s in self.parts}

    def __repr__(self) -> str:
        return f"LoopElement({self.model.name}, {self.parts})"


def _slot_floor(model: HierarchyModel, slot: str, min_degree: int) -> int:
    """Smallest allowed λ-power of ``slot`` whose principal degree is >= min_degree."""
    k = (Fraction(min_degree) - model.delta[slot]) * model.N / model.rh
    k = -((-k.numerator) // k.denominator)  # ceil
    res = model.slot_by_name[slot].residue
    while (k - res) % model.N:
        k += 1
    return k


def bracket(x: LoopElement, y: LoopElement) -> LoopElement:
    m = x.model
    out: Dict[str, LaurentSeries] = {}
    for a, pa in x.parts.items():
        for b, pb in y.parts.items():
            sc = m.structure.get((a, b))
            if not sc:
                continue
            prod = pa * pb
            for g, c in sc:
                term = prod.scale(c)
                out[g] = out[g] + term if g in out else term
    return LoopElement(m, out)


def pair(x: LoopElement, y: LoopElement) -> LaurentSeries:
    """Normalized invariant form (x|y); the trace form for the shipped models."""
    if x.model is not y.model and x.model.name != y.model.name:
        raise ValueError("elements of different models")
    out = None
    for (a, b), g in x.model.gram.items():
        if a in x.parts and b in y.parts:
            term = (x.parts[a] * y.parts[b]).scale(g)
            out = term if out is None else out + term
    return out if out is not None else LaurentSeries()


def kappa(x: LoopElement, y: LoopElement):
    """κ(x, y) = Res_λ (x|y) λ^{-1}, i.e. the λ^0 coefficient of the pairing."""
    return pair(x, y).coefficient(0)


def b_form(xs: Sequence[LoopElement], degrees=None) -> MultiLaurent:
    """tr(ad x_1 ∘ ... ∘ ad x_k), each argument in its own spectral variable.

    ``degrees`` restricts the result to the listed total degrees.
    """
    m = xs[0].model
    k = len(xs)
    out = MultiLaurent(k, degrees=degrees)
    first = True
    for combo, t in m.ad_trace_tensor(k).items():
        if not all(s in x.parts for s, x in zip(combo, xs)):
            continue
        term = MultiLaurent.tensor([x.parts[s] for s, x in zip(combo, xs)], degrees).scale(t)
        out = term if first else out + term
        first = False
    return out


def pair_two_variables(x: LoopElement, y: LoopElement, degrees=None) -> MultiLaurent:
    """(x(λ) | y(μ)) as a bivariate series."""
    out = None
    for (a, b), g in x.model.gram.items():
        if a in x.parts and b in y.parts:
            term = MultiLaurent.tensor([x.parts[a], y.parts[b]], degrees).scale(g)
            out = term if out is None else out + term
    return out if out is not None else MultiLaurent(2, degrees=degrees)


# ---------------------------------------------------------------------------
# Heisenberg decomposition on graded slices


def _q(x) -> Fraction:
    x = sympy.nsimplify(x)
    return Fraction(int(x.p), int(x.q))


class SliceSolver:
    """Inverts ad Λ on graded slices.

    For a target degree t, any X in the degree-t slice splits uniquely as
    X = Σ c_i Λ_i + [Λ, Y] with Y in (im ad Λ) at degree t-1.  The rational
    maps X -> c and X -> Y depend only on t mod rh and are cached.
    """

    def __init__(self, model: HierarchyModel):
        self.model = model
        self._cache: Dict[int, tuple] = {}
        lam = model.Lambda(1)
        self.lambda_slots = {s: next(iter(p.coeffs)) for s, p in lam.parts.items()}
        self.lambda_coeffs = {s: p.coeffs[next(iter(p.coeffs))] for s, p in lam.parts.items()}

    def ad_lambda_matrix(self, degree: int) -> sympy.Matrix:
        """Matrix of ad Λ from the degree slice to the degree+1 slice."""
        m = self.model
        src = m.slice_slots(degree)
        dst = m.slice_slots(degree + 1)
        idx = {s: i for i, s in enumerate(dst)}
        M = sympy.zeros(len(dst), len(src))
        for j, b in enumerate(src):
            for a, c in self.lambda_coeffs.items():
                for g, sc in m.structure.get((a, b), ()):
                    if g not in idx:
                        raise ModelValidationError("ad Λ leaves the graded slice")
                    M[idx[g], j] += sympy.Rational(c * sc)
        return M

    def data(self, target: int):
        key = target % self.model.rh
        if key not in self._cache:
            self._cache[key] = self._build(key)
        return self._cache[key]

    def _build(self, t: int):
        m = self.model
        dst = m.slice_slots(t)
        src = m.slice_slots(t - 1)
        A_prev = self.ad_lambda_matrix(t - 2)
        im_basis = A_prev.columnspace()
        A = self.ad_lambda_matrix(t - 1)
        hs = m.heisenberg_slice(t)
        cols = []
        for hv in hs:
            cols.append(sympy.Matrix([sympy.Rational(hv.get(s, 0)) for s in dst]))
        for v in im_basis:
            cols.append(A * v)
        if not cols:
            return dst, src, [], [[]]
        B = sympy.Matrix.hstack(*cols)
        if B.shape[0] != B.shape[1] or B.rank() != B.shape[0]:
            raise ModelValidationError(f"ℋ ⊕ im ad Λ fails to span slice {t}")
        Binv = B.inv()
        nh = len(hs)
        hrows = [[_q(Binv[i, j]) for j in range(len(dst))] for i in range(nh)]
        if im_basis:
            Ib = sympy.Matrix.hstack(*im_basis)
            Y = Ib * Binv[nh:, :]
        else:
            Y = sympy.zeros(len(src), len(dst))
        ymap = [[_q(Y[i, j]) for j in range(len(dst))] for i in range(len(src))]
        return dst, src, hrows, ymap

    def split(self, target: int, x: Slice, zero=ZERO) -> Tuple[List[object], Slice]:
        """Return (ℋ-coefficients, Y) with x = Σ c_i Λ_i + [Λ, Y]."""
        dst, src, hrows, ymap = self.data(target)
        extra = set(x) - set(dst)
        if extra:
            raise ModelValidationError(f"slots {extra} do not live at degree {target}")
        xs = [x.get(s) for s in dst]
        hc = [_lincomb(row, xs, zero) for row in hrows]
        y = {}
        for s, row in zip(src, ymap):
            v = _lincomb(row, xs, zero)
            if v:
                y[s] = v
        return hc, y


def _lincomb(row, xs, zero):
    acc = zero
    for c, x in zip(row, xs):
        if c and x is not None:
            acc = acc + x * c
    return acc


def project_heisenberg(x: LoopElement) -> Tuple[Dict[int, object], LoopElement]:
    """Split x = π_ℋ(x) + [Λ, y]; returns ({exponent i: coefficient}, y)."""
    m = x.model
    solver = m.ad_lambda_solver
    coords: Dict[int, object] = {}
    ys: Dict[int, Slice] = {}
    for d, sl in x.slices().items():
        zero = ZERO if any(isinstance(c, DiffPoly) for c in sl.values()) else Fraction(0)
        hc, y = solver.split(d, sl, zero)
        for c in hc:
            if c:
                coords[d] = c
        if y:
            ys[d - 1] = y
    return coords, LoopElement.from_slices(m, ys)


def principal_degree(x: LoopElement) -> Fraction:
    return x.principal_degree()


def slice_bracket(model: HierarchyModel, x: Slice, y: Slice) -> Slice:
    """Bracket of two homogeneous components in slot coordinates."""
    out: Slice = {}
    for a, ca in x.items():
        for b, cb in y.items():
            sc = model.structure.get((a, b))
            if not sc:
                continue
            p = ca * cb
            for g, c in sc:
                t = p * c
                out[g] = out[g] + t if g in out else t
    return {s: c for s, c in out.items() if c}


# ---------------------------------------------------------------------------
# Drinfeld–Sokolov gauge fixing


GAUGE_VAR = 9  # jet-variable index reserved for the unknown gauge parameter


def canonical_gauge(q: Mapping[str, DiffPoly], model: HierarchyModel
                    ) -> Tuple[Dict[str, DiffPoly], Dict[str, DiffPoly]]:
    """Find N in 𝔫 with e^{ad N}(∂ + Λ + q) = ∂ + Λ + q^can, q^can in V.

    ``q`` gives slot coordinates (λ^0) in the Borel subalgebra.  The shipped
    models have dim 𝔫 = 1, so N = ν·n_0 with one unknown ν; the components of
    the gauge transform outside V are affine in ν and fix it.
    Returns (N, q^can) as slot-coordinate maps.
    """
    if set(q) - set(model.borel):
        raise GaugeError("q is not in the Borel subalgebra")
    if len(model.nilpotent) != 1:
        raise GaugeError("only one-dimensional 𝔫 is supported")
    n0 = model.nilpotent[0]
    nu = u(0, GAUGE_VAR)
    Nsl: Slice = {n0: nu}
    qt = _gauge_transform(model, q, Nsl)
    vslots = {s for s, _ in model.gauge_V}
    eqs = {s: c for s, c in qt.items() if s not in vslots and c}
    sol = None
    for s, c in eqs.items():
        lin = c.partial((GAUGE_VAR, 0))
        if lin.jets() or any(j[0] == GAUGE_VAR and j != (GAUGE_VAR, 0) for j in c.jets()):
            raise GaugeError("gauge equation is not affine in the parameter")
        if not lin:
            continue
        const = c.substitute({GAUGE_VAR: ZERO})
        sol = const.scale(-1 / lin.constant_term())
        break
    if sol is None:
        sol = ZERO
    N_can = {n0: sol} if sol else {}
    qc = {s: c.substitute({GAUGE_VAR: sol}) for s, c in qt.items()}
    bad = {s for s, c in qc.items() if s not in vslots and c}
    if bad:
        raise GaugeError(f"components {sorted(bad)} survive gauge fixing")
    return N_can, {s: c for s, c in qc.items() if c}


def _gauge_transform(model: HierarchyModel, q: Mapping[str, DiffPoly], Nsl: Slice) -> Slice:
    """λ^0 part of e^{ad N}(Λ + q) - Λ - N_x, with N of λ-degree 0."""
    base: Slice = {s: DiffPoly.const(c) for s, c in model.e_principal.items()}
    for s, c in q.items():
        base[s] = base.get(s, ZERO) + c
    out: Slice = dict(base)
    term = base
    k = 1
    while True:
        term = slice_bracket(model, Nsl, term)
        if not term:
            break
        term = {s: c.scale(Fraction(1, k)) for s, c in term.items()}
        for s, c in term.items():
            out[s] = out.get(s, ZERO) + c
        k += 1
        if k > 20:
            raise GaugeError("ad N is not nilpotent")
    # [N, ẽλ] must vanish for the λ^1 part to be untouched
    if slice_bracket(model, Nsl, {s: DiffPoly.const(c) for s, c in model.e_tilde.items()}):
        raise GaugeError("𝔫 does not commute with ẽ")
    for s, c in model.e_principal.items():
        out[s] = out[s] - DiffPoly.const(c)
    for s, c in Nsl.items():
        out[s] = out.get(s, ZERO) - c.dx()
    return {s: c for s, c in out.items() if c}


def gauge_transform_matrix(model: HierarchyModel, q: Mapping[str, DiffPoly],
                           N: Mapping[str, DiffPoly]) -> List[List[DiffPoly]]:
    """Raw-matrix check: e^N (Λ_0 + q) e^{-N} - Λ_0 - N_x with e^N a finite sum."""
    n = model.n_g

    def to_mat(sl):
        M = [[ZERO] * n for _ in range(n)]
        for s, c in sl.items():
            mat = model.slot_by_name[s].matrix
            for i in range(n):
                for j in range(n):
                    if mat[i][j]:
                        M[i][j] = M[i][j] + (c if isinstance(c, DiffPoly) else DiffPoly.const(c)) * mat[i][j]
        return M

    def mm(A, B):
        return [[sum((A[i][k] * B[k][j] for k in range(n)), ZERO) for j in range(n)] for i in range(n)]

    def expm(A, sign):
        out = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
        P = out
        for k in range(1, n + 1):
            P = mm(P, A)
            f = Fraction(sign ** k, _fact(k))
            out = [[out[i][j] + P[i][j] * f for j in range(n)] for i in range(n)]
        return out

    Nm = to_mat(N)
    base = dict(model.e_principal)
    for s, c in q.items():
        base[s] = DiffPoly.const(base[s]) + c if s in base else c
    X = to_mat(base)
    conj = mm(mm(expm(Nm, 1), X), expm(Nm, -1))
    e0 = to_mat(model.e_principal)
    Nx = [[c.dx() for c in row] for row in Nm]
    return [[conj[i][j] - e0[i][j] - Nx[i][j] for j in range(n)] for i in range(n)]


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# shipped models


def _f(x) -> Fraction:
    return Fraction(x)


def _sl3_slots(residues: Mapping[str, int]) -> Tuple[Slot, ...]:
    n = 3
    mats = {
        "a1": madd(E(n, 1, 1), E(n, 3, 3, -1)),
        "a2": madd(E(n, 1, 1), E(n, 2, 2, -2), E(n, 3, 3)),
        "b1": madd(E(n, 1, 2), E(n, 2, 3)),
        "b2": madd(E(n, 1, 2), E(n, 2, 3, -1)),
        "p": E(n, 1, 3),
        "c1": madd(E(n, 2, 1), E(n, 3, 2)),
        "c2": madd(E(n, 2, 1), E(n, 3, 2, -1)),
        "r": E(n, 3, 1),
    }
    return tuple(Slot(k, mats[k], residues[k]) for k in mats)


A22_CARTAN = ((2, -4), (-1, 2))


def sawada_kotera() -> HierarchyModel:
    n = 3
    slots = _sl3_slots({"a1": 0, "p": 0, "r": 0, "b2": 1, "c1": 1, "a2": 2, "b1": 3, "c2": 3})
    ch = {
        "e0": Generator(madd(E(n, 2, 1), E(n, 3, 2)), 1),
        "h0": Generator(madd(E(n, 1, 1, -2), E(n, 3, 3, 2)), 0),
        "f0": Generator(madd(E(n, 1, 2, 2), E(n, 2, 3, 2)), -1),
        "e1": Generator(E(n, 1, 3), 0),
        "h1": Generator(madd(E(n, 1, 1), E(n, 3, 3, -1)), 0),
        "f1": Generator(E(n, 3, 1), 0),
    }
    u_ = u(0)
    return HierarchyModel(
        name="sk",
        title="A2^(2), vertex c0 (Sawada-Kotera)",
        n_g=3, r=2, h=3, h_dual_g=3, m_vertex=0, a_m=2,
        exponents=(1, 5),
        slots=slots,
        rho=(_f("1/2"), _f(0), _f("-1/2")),
        cartan=A22_CARTAN,
        chevalley=ch,
        heisenberg=(
            {"c1": (_f(1), 1), "p": (_f(1), 0)},
            {"b1": (_f(1), 3), "r": (_f(1), 4)},
        ),
        borel=("a1", "r"),
        nilpotent=("r",),
        gauge_V=(("r", _f(1)),),
        hamiltonian_P=(-u_.dx(), u_.scale(-2), ZERO, DiffPoly.const(Fraction(1, 2))),
    )


def kaup_kupershmidt() -> HierarchyModel:
    n = 3
    slots = _sl3_slots({"a1": 0, "b1": 0, "c1": 0, "a2": 1, "b2": 1, "c2": 1, "p": 1, "r": 1})
    ch = {
        "e0": Generator(madd(E(n, 1, 2), E(n, 2, 3)), 0),
        "h0": Generator(madd(E(n, 1, 1, 2), E(n, 3, 3, -2)), 0),
        "f0": Generator(madd(E(n, 2, 1, 2), E(n, 3, 2, 2)), 0),
        "e1": Generator(E(n, 3, 1), 1),
        "h1": Generator(madd(E(n, 3, 3), E(n, 1, 1, -1)), 0),
        "f1": Generator(E(n, 1, 3), -1),
    }
    u_ = u(0)
    return HierarchyModel(
        name="kk",
        title="A2^(2), vertex c1 (Kaup-Kupershmidt)",
        n_g=3, r=2, h=3, h_dual_g=3, m_vertex=1, a_m=1,
        exponents=(1, 5),
        slots=slots,
        rho=(_f(1), _f(0), _f(-1)),
        cartan=A22_CARTAN,
        chevalley=ch,
        heisenberg=(
            {"b1": (_f(1), 0), "r": (_f(1), 1)},
            {"c1": (_f(1), 2), "p": (_f(1), 1)},
        ),
        borel=("a1", "c1"),
        nilpotent=("c1",),
        gauge_V=(("c1", _f(1)),),
        hamiltonian_P=(u_.dx().scale(Fraction(-1, 2)), -u_, ZERO, DiffPoly.const(Fraction(1, 2))),
    )


def kdv() -> HierarchyModel:
    """A1^(1) at c0: Λ = E12 + E21 λ, q^can = u E21."""
    n = 2
    slots = (
        Slot("h", madd(E(n, 1, 1), E(n, 2, 2, -1)), 0),
        Slot("e", E(n, 1, 2), 0),
        Slot("f", E(n, 2, 1), 0),
    )
    ch = {
        "e0": Generator(E(n, 2, 1), 1),
        "h0": Generator(madd(E(n, 2, 2), E(n, 1, 1, -1)), 0),
        "f0": Generator(E(n, 1, 2), -1),
        "e1": Generator(E(n, 1, 2), 0),
        "h1": Generator(madd(E(n, 1, 1), E(n, 2, 2, -1)), 0),
        "f1": Generator(E(n, 2, 1), 0),
    }
    u_ = u(0)
    return HierarchyModel(
        name="kdv",
        title="A1^(1), vertex c0 (KdV)",
        n_g=2, r=1, h=2, h_dual_g=2, m_vertex=0, a_m=1,
        exponents=(1,),
        slots=slots,
        rho=(_f("1/2"), _f("-1/2")),
        cartan=((2, -2), (-2, 2)),
        chevalley=ch,
        heisenberg=({"e": (_f(1), 0), "f": (_f(1), 1)},),
        borel=("h", "f"),
        nilpotent=("f",),
        gauge_V=(("f", _f(1)),),
        hamiltonian_P=(-u_.dx(), u_.scale(-2), ZERO, DiffPoly.const(Fraction(1, 2))),
    )


# ---------------------------------------------------------------------------
# validation and catalog


def _gen_entry_powers(model: HierarchyModel, g: Generator) -> Dict[str, Fraction]:
    co = model.coordinates(g.matrix)
    for s in co:
        if (g.power - model.slot_by_name[s].residue) % model.N:
            raise ModelValidationError(f"generator violates the twist in slot {s}")
    return co


def validate_model(model: HierarchyModel) -> None:
    """Check every structural invariant of the stored data; raise on failure."""
    m = model
    _ = m.delta
    # slots: traceless, independent, spanning sl_n
    for s in m.slots:
        if mtrace(s.matrix):
            raise ModelValidationError(f"slot {s.name} is not traceless")
    if len(m.slots) != m.n_g ** 2 - 1:
        raise ModelValidationError("slot basis has the wrong dimension")
    # Chevalley relations with λ-powers
    ell = len(m.cartan)
    gens = {k: g for k, g in m.chevalley.items()}
    for k, g in gens.items():
        _gen_entry_powers(m, g)
    for i in range(ell):
        for j in range(ell):
            hi, ej, fj = gens[f"h{i}"], gens[f"e{j}"], gens[f"f{j}"]
            ei = gens[f"e{i}"]
            C = m.cartan[i][j]
            if mcomm(hi.matrix, ej.matrix) != mscale(ej.matrix, C):
                raise ModelValidationError(f"[h{i}, e{j}] != C e{j}")
            if mcomm(hi.matrix, fj.matrix) != mscale(fj.matrix, -C):
                raise ModelValidationError(f"[h{i}, f{j}] != -C f{j}")
            br = mcomm(ei.matrix, fj.matrix)
            pw = ei.power + fj.power
            want = hi.matrix if i == j else mzero(m.n_g)
            if br != want or (i == j and pw != 0):
                raise ModelValidationError(f"[e{i}, f{j}] relation fails")
            if mcomm(hi.matrix, gens[f"h{j}"].matrix) != mzero(m.n_g):
                raise ModelValidationError("Cartan elements do not commute")
    # ρ^∨ grading: every e_i has principal degree 1
    for i in range(ell):
        g = gens[f"e{i}"]
        for s in m.coordinates(g.matrix):
            if m.principal_degree_of(s, g.power) != 1:
                raise ModelValidationError(f"e{i} is not of principal degree 1")
    # Λ is the sum of the e_i
    lam = m.Lambda(1)
    esum = None
    for i in range(ell):
        el = m.chevalley_element(f"e{i}")
        esum = el if esum is None else esum + el
    if not (lam - esum).is_zero():
        raise ModelValidationError("Λ_1 differs from the sum of the e_i")
    # exponent duality and Heisenberg relations
    n = m.n
    for a in range(1, n + 1):
        if m.exponents[a - 1] + m.exponents[n - a] != m.rh:
            raise ModelValidationError("exponents are not dual")
    for a in range(1, n + 1):
        la = m.Lambda(a)
        if la.principal_degree() != m.exponent_index(a):
            raise ModelValidationError(f"Λ_{a} has the wrong principal degree")
        for b in range(1, n + 1):
            lb = m.Lambda(b)
            if not bracket(la, lb).is_zero():
                raise ModelValidationError("ℋ is not abelian")
            pr = pair(la, lb)
            want = LaurentSeries({m.N: Fraction(m.h)}) if a + b == n + 1 else LaurentSeries()
            if pr != want:
                raise ModelValidationError(f"(Λ_{a}|Λ_{b}) normalization fails")
    # gauge data: 𝔫 ⊂ 𝔟 ⊂ degree-0 slots, V ⊂ 𝔟
    for s in m.borel:
        if m.slot_by_name[s].residue % m.N:
            raise ModelValidationError("Borel slot is not in standard degree 0")
    if not set(m.nilpotent) <= set(m.borel) or not {s for s, _ in m.gauge_V} <= set(m.borel):
        raise ModelValidationError("𝔫 and V must lie in 𝔟")
    if m.hamiltonian_P is not None and len(m.hamiltonian_P) < 1:
        raise ModelValidationError("empty Hamiltonian operator")
    # slice solver must be well defined on every degree class
    for t in range(m.rh):
        m.ad_lambda_solver.data(t)


_CATALOG: Optional[Dict[str, HierarchyModel]] = None
PRIMARY_MODELS = ("sk", "kk")


def model_catalog() -> List[HierarchyModel]:
    global _CATALOG
    if _CATALOG is None:
        cat = {}
        for ctor in (sawada_kotera, kaup_kupershmidt, kdv):
            mdl = ctor()
            validate_model(mdl)
            cat[mdl.name] = mdl
        _CATALOG = cat
    return list(_CATALOG.values())


def get_model(name: str) -> HierarchyModel:
    model_catalog()
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {sorted(_CATALOG)}") from None
