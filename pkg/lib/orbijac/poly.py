"""Multivariate polynomials over QSeries, diagonal group actions and
difference quotients.

Indices are 0-based throughout. A VarSet with ``copies`` > 1 lays the copies
out one after another: flat index ``c * n + i`` is variable i of copy c.
"""

from __future__ import annotations

import logging
import math
import operator
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .config import GROUP_BOUND
from .errors import InternalDivisionError, OrbijacError
from .scalar import INF, CycNum, QSeries, Rational, to_rational

logger = logging.getLogger(__name__)

COPY_TAGS = ("x", "y", "z")

Scalar = Union[int, Rational, CycNum, QSeries]
Monomial = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarSet:
    names: tuple[str, ...]
    copies: int = 1

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        if not 1 <= self.copies <= len(COPY_TAGS):
            raise ValueError(f"copies must be 1..{len(COPY_TAGS)}, got {self.copies}")

    @classmethod
    def standard(cls, n: int, copies: int = 1) -> "VarSet":
        return cls(tuple(f"x{i + 1}" for i in range(n)), copies)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def size(self) -> int:
        return self.n * self.copies

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(_tag(name, c) for c in range(self.copies) for name in self.names)

    def index(self, copy: int, i: int) -> int:
        return copy * self.n + i

    def with_copies(self, copies: int) -> "VarSet":
        return VarSet(self.names, copies)

    def sub(self, keep: Sequence[int]) -> "VarSet":
        return VarSet(tuple(self.names[i] for i in keep), 1)


def _tag(name: str, copy: int) -> str:
    if copy == 0:
        return name
    if name.startswith("x"):
        return COPY_TAGS[copy] + name[1:]
    return name + "'" * copy


# ---------------------------------------------------------------------------
# Diagonal group elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """h = (ζ_m^{k_1}, ..., ζ_m^{k_n}), stored as the exponents k_i mod m."""

    m: int
    exps: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "exps", tuple(int(k) % self.m for k in self.exps))

    @classmethod
    def identity(cls, m: int, n: int) -> "GroupElement":
        return cls(m, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.exps)

    @property
    def entries(self) -> tuple[CycNum, ...]:
        return tuple(CycNum.root(self.m, k) for k in self.exps)

    @property
    def moved(self) -> tuple[int, ...]:
        """Indices with h_i != 1."""
        return tuple(i for i, k in enumerate(self.exps) if k)

    @property
    def fixed(self) -> tuple[int, ...]:
        """Indices with h_i = 1, i.e. the coordinates of Fix(h)."""
        return tuple(i for i, k in enumerate(self.exps) if not k)

    @property
    def d(self) -> int:
        return len(self.moved)

    @property
    def parity(self) -> int:
        return self.d % 2

    @property
    def order(self) -> int:
        return reduce(_lcm, (self.m // math.gcd(self.m, k) for k in self.exps), 1)

    def is_identity(self) -> bool:
        return not any(self.exps)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if other.m != self.m or other.n != self.n:
            raise ValueError("group elements of different shape")
        return GroupElement(self.m, tuple(a + b for a, b in zip(self.exps, other.exps)))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.m, tuple(-k for k in self.exps))

    def __pow__(self, k: int) -> "GroupElement":
        return GroupElement(self.m, tuple(a * k for a in self.exps))

    def entry(self, i: int) -> CycNum:
        return CycNum.root(self.m, self.exps[i])

    def scale_of(self, exps: Sequence[int]) -> CycNum:
        """∏ h_i^{e_i} for a monomial exponent vector over one copy."""
        return CycNum.root(self.m, sum(k * e for k, e in zip(self.exps, exps)))

    def key(self, exponent: int | None = None) -> str:
        """Comma-joined exponents over ζ_e, e defaulting to m."""
        e = exponent or self.m
        if self.m % e:
            raise ValueError(f"{e} does not divide {self.m}")
        step = self.m // e
        if any(k % step for k in self.exps):
            raise ValueError(f"{self} is not defined over ζ_{e}")
        return ",".join(str(k // step) for k in self.exps)

    @classmethod
    def from_key(cls, m: int, text: str, exponent: int | None = None) -> "GroupElement":
        e = exponent or m
        if m % e:
            raise ValueError(f"{e} does not divide {m}")
        try:
            ks = [int(t) for t in text.split(",")]
        except ValueError:
            raise ValueError(f"malformed group element {text!r}") from None
        return cls(m, tuple(k * (m // e) for k in ks))

    def __str__(self) -> str:
        return f"({self.key()})/ζ{self.m}"


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class DiagonalGroup:
    generators: tuple[GroupElement, ...]
    elements: tuple[GroupElement, ...] = field(default=())

    @classmethod
    def generate(cls, generators: Iterable[GroupElement], m: int | None = None,
                 n: int | None = None, bound: int = GROUP_BOUND) -> "DiagonalGroup":
        gens = tuple(generators)
        if not gens:
            if m is None or n is None:
                raise ValueError("trivial group needs m and n")
            gens = (GroupElement.identity(m, n),)
        ident = GroupElement.identity(gens[0].m, gens[0].n)
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for h in frontier:
                for g in gens:
                    p = h * g
                    if p not in seen:
                        seen.add(p)
                        nxt.append(p)
                        if len(seen) > bound:
                            raise OrbijacError(f"group closure exceeds bound {bound}")
            frontier = nxt
        elements = tuple(sorted(seen, key=lambda h: (h.order, h.exps)))
        logger.debug("diagonal group with %d elements", len(elements))
        return cls(gens, elements)

    @property
    def m(self) -> int:
        return self.generators[0].m

    @property
    def n(self) -> int:
        return self.generators[0].n

    @property
    def identity(self) -> GroupElement:
        return GroupElement.identity(self.m, self.n)

    @property
    def exponent(self) -> int:
        return reduce(_lcm, (h.order for h in self.elements), 1)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, h: GroupElement) -> bool:
        return h in self.elements

    def key(self, h: GroupElement) -> str:
        return h.key(self.exponent)

    def parse(self, text: str) -> GroupElement:
        h = GroupElement.from_key(self.m, text, self.exponent)
        if h.n != self.n or h not in self.elements:
            raise ValueError(f"{text!r} is not an element of the group")
        return h

    def character_of(self, exps: Sequence[int]) -> tuple[int, ...]:
        """Character h ↦ ∏ h_i^{e_i}, as its exponents (mod m) on the generators."""
        return tuple(sum(k * e for k, e in zip(g.exps, exps)) % self.m for g in self.generators)

    def characters(self) -> list[tuple[int, ...]]:
        """The dual group, generated by the coordinate characters."""
        units = [self.character_of([1 if j == i else 0 for j in range(self.n)]) for i in range(self.n)]
        zero = tuple(0 for _ in self.generators)
        seen = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for c in frontier:
                for u in units:
                    s = tuple((a + b) % self.m for a, b in zip(c, u))
                    if s not in seen:
                        seen.add(s)
                        nxt.append(s)
            frontier = nxt
        return sorted(seen)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def _add_exps(a: Monomial, b: Monomial) -> Monomial:
    return tuple(map(operator.add, a, b))


@dataclass(frozen=True, eq=False)
class MultiPoly:
    varset: VarSet
    m: int
    terms: Mapping[Monomial, QSeries] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self) -> None:
        size = self.varset.size
        clean = {}
        for exps, c in self.terms.items():
            if len(exps) != size:
                raise ValueError(f"exponent {exps} does not match {size} variables")
            if not isinstance(c, QSeries):
                c = QSeries.constant(self.m, c)
            if not c.is_zero():
                clean[tuple(exps)] = c
        object.__setattr__(self, "terms", clean)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, varset: VarSet, m: int) -> "MultiPoly":
        return cls(varset, m, {})

    @classmethod
    def constant(cls, varset: VarSet, m: int, value: Scalar) -> "MultiPoly":
        return cls(varset, m, {(0,) * varset.size: value})

    @classmethod
    def one(cls, varset: VarSet, m: int) -> "MultiPoly":
        return cls.constant(varset, m, 1)

    @classmethod
    def variable(cls, varset: VarSet, m: int, index: int, copy: int = 0) -> "MultiPoly":
        exps = [0] * varset.size
        exps[varset.index(copy, index)] = 1
        return cls(varset, m, {tuple(exps): 1})

    @classmethod
    def monomial(cls, varset: VarSet, m: int, exps: Sequence[int], coeff: Scalar = 1) -> "MultiPoly":
        return cls(varset, m, {tuple(exps): coeff})

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficient(self, exps: Sequence[int]) -> QSeries:
        return self.terms.get(tuple(exps), QSeries.zero(self.m))

    def precision(self) -> float:
        return min((c.prec for c in self.terms.values()), default=INF)

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "MultiPoly") -> None:
        if other.varset != self.varset or other.m != self.m:
            raise ValueError(f"ring mismatch: {self.varset} vs {other.varset}")

    def __add__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            if isinstance(other, (int, Rational, CycNum, QSeries)):
                other = MultiPoly.constant(self.varset, self.m, other)
            else:
                return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return MultiPoly(self.varset, self.m, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.varset, self.m, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def scale(self, c: Scalar) -> "MultiPoly":
        return MultiPoly(self.varset, self.m, {e: a * c for e, a in self.terms.items()})

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, (int, Rational, CycNum, QSeries)):
            return self.scale(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check(other)
        out: dict[Monomial, QSeries] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = _add_exps(ea, eb)
                t = ca * cb
                out[e] = out[e] + t if e in out else t
        return MultiPoly(self.varset, self.m, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.one(self.varset, self.m)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def map_coefficients(self, fn) -> "MultiPoly":
        return MultiPoly(self.varset, self.m, {e: fn(c) for e, c in self.terms.items()})

    def specialize(self, q) -> "MultiPoly":
        """Replace every series coefficient by its value at a rational q."""
        return self.map_coefficients(lambda c: QSeries.constant(self.m, c.evaluate(q)))

    # -- comparison ---------------------------------------------------------

    def compare(self, other: "MultiPoly") -> tuple[bool, float]:
        """(agree below the effective precision, effective precision)."""
        if isinstance(other, (int, Rational, CycNum, QSeries)):
            other = MultiPoly.constant(self.varset, self.m, other)
        self._check(other)
        eff = INF
        ok = True
        zero = QSeries.zero(self.m)
        for e in set(self.terms) | set(other.terms):
            same, p, _ = self.terms.get(e, zero).compare(other.terms.get(e, zero))
            eff = min(eff, p)
            ok = ok and same
        return ok, eff

    def __eq__(self, other) -> bool:
        if not isinstance(other, (MultiPoly, int, Rational, CycNum, QSeries)):
            return NotImplemented
        return self.compare(other)[0]

    # -- ring maps ----------------------------------------------------------

    def embed(self, target: VarSet, positions: Sequence[int] | None = None) -> "MultiPoly":
        """Move into ``target``; variable i goes to flat index positions[i]
        (identity on the leading block by default)."""
        if positions is None:
            positions = range(self.varset.size)
        positions = list(positions)
        out = {}
        for e, c in self.terms.items():
            new = [0] * target.size
            for i, k in enumerate(e):
                if k:
                    new[positions[i]] += k
            out[tuple(new)] = c
        return MultiPoly(target, self.m, out)

    def restrict(self, keep: Sequence[int]) -> "MultiPoly":
        """Set every variable outside ``keep`` to zero and drop it (one copy)."""
        if self.varset.copies != 1:
            raise ValueError("restrict works on a single copy")
        keep = list(keep)
        dropped = [i for i in range(self.varset.n) if i not in keep]
        out = {}
        for e, c in self.terms.items():
            if any(e[i] for i in dropped):
                continue
            out[tuple(e[i] for i in keep)] = c
        return MultiPoly(self.varset.sub(keep), self.m, out)

    def to_json(self) -> list[dict]:
        return [{"exps": list(e), "coeff": self.terms[e].to_json()} for e in sorted(self.terms)]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        syms = self.varset.symbols
        parts = []
        for e in sorted(self.terms, reverse=True):
            mono = "*".join(s if k == 1 else f"{s}^{k}" for s, k in zip(syms, e) if k)
            parts.append(f"({self.terms[e]})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

Assignment = Optional[Tuple[Scalar, int]]


def substitute(p: MultiPoly, assignment: Sequence[Assignment], target: VarSet) -> MultiPoly:
    """Ring map sending flat variable i to ``c * t_j`` for assignment[i] = (c, j),
    or to 0 for None."""
    if len(assignment) != p.varset.size:
        raise ValueError(f"assignment covers {len(assignment)} of {p.varset.size} variables")
    powers: dict[tuple[int, int], QSeries] = {}
    out: dict[Monomial, QSeries] = {}
    for e, c in p.terms.items():
        new = [0] * target.size
        coeff = c
        for i, k in enumerate(e):
            if not k:
                continue
            a = assignment[i]
            if a is None:
                coeff = None
                break
            scale, j = a
            new[j] += k
            if not (isinstance(scale, int) and scale == 1):
                key = (i, k)
                if key not in powers:
                    powers[key] = QSeries.constant(p.m, 1) * (scale ** k)
                coeff = coeff * powers[key]
        if coeff is None:
            continue
        t = tuple(new)
        out[t] = out[t] + coeff if t in out else coeff
    return MultiPoly(target, p.m, out)


def act(g: GroupElement, p: MultiPoly) -> MultiPoly:
    """(g·p)(x) = p(g·x), applied diagonally on every copy."""
    n = p.varset.n
    if g.n != n:
        raise ValueError(f"group element of arity {g.n} on {n} variables")
    out = {}
    for e, c in p.terms.items():
        k = sum(g.exps[i % n] * ei for i, ei in enumerate(e))
        out[e] = c * CycNum.root(p.m, k) if k % p.m else c
    return MultiPoly(p.varset, p.m, out)


def partial_derivative(p: MultiPoly, i: int) -> MultiPoly:
    out = {}
    for e, c in p.terms.items():
        k = e[i]
        if k:
            new = list(e)
            new[i] -= 1
            out[tuple(new)] = c * k
    return MultiPoly(p.varset, p.m, out)


def divide_by_difference(num: MultiPoly, t: int, s: int) -> MultiPoly:
    """Exact quotient num / (v_t - v_s) by synthetic division along v_t."""
    by_power: dict[int, dict[Monomial, QSeries]] = {}
    for e, c in num.terms.items():
        k = e[t]
        rest = list(e)
        rest[t] = 0
        by_power.setdefault(k, {})[tuple(rest)] = c
    if not by_power:
        return MultiPoly.zero(num.varset, num.m)
    top = max(by_power)

    def times_s(poly: dict) -> dict:
        out = {}
        for e, c in poly.items():
            new = list(e)
            new[s] += 1
            out[tuple(new)] = c
        return out

    def plus(a: dict, b: dict) -> dict:
        out = dict(a)
        for e, c in b.items():
            out[e] = out[e] + c if e in out else c
        return {e: c for e, c in out.items() if not c.is_zero()}

    quotient: dict[int, dict] = {}
    carry: dict = {}
    for k in range(top, 0, -1):
        carry = plus(by_power.get(k, {}), times_s(carry))
        quotient[k - 1] = carry
    remainder = plus(by_power.get(0, {}), times_s(carry))
    if remainder:
        raise InternalDivisionError(
            f"division by ({num.varset.symbols[t]} - {num.varset.symbols[s]}) left remainder "
            f"{MultiPoly(num.varset, num.m, remainder)}"
        )
    out = {}
    for k, poly in quotient.items():
        for e, c in poly.items():
            new = list(e)
            new[t] += k
            out[tuple(new)] = c
    return MultiPoly(num.varset, num.m, out)


CONVENTIONS = ("tail", "head")


def diff_quotient(p: MultiPoly, j: int, *, source: int = 0, target: int | None = None,
                  convention: str = "tail") -> MultiPoly:
    """∇_j^{s→(s,t)} p: difference quotient in slot j from copy ``source`` to copy
    ``target`` (a new copy by default).

    tail: numerator p(s_<j, t_≥j) - p(s_≤j, t_>j)
    head: numerator p(t_≤j, s_>j) - p(t_<j, s_≥j)
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    vs = p.varset
    n = vs.n
    if not 0 <= j < n:
        raise ValueError(f"slot {j} out of range for {n} variables")
    if target is None:
        target = vs.copies
    ring = vs.with_copies(max(vs.copies, target + 1))
    q = p.embed(ring) if ring != vs else p

    def moved_through(slots: Iterable[int]) -> MultiPoly:
        slots = set(slots)
        assignment = [(1, i) for i in range(ring.size)]
        for i in slots:
            assignment[ring.index(source, i)] = (1, ring.index(target, i))
        return substitute(q, assignment, ring)

    if convention == "tail":
        after = moved_through(range(j, n))
        before = moved_through(range(j + 1, n))
    else:
        after = moved_through(range(0, j + 1))
        before = moved_through(range(0, j))
    return divide_by_difference(after - before, ring.index(target, j), ring.index(source, j))


def restrict_copy(p: MultiPoly, images: Sequence[Sequence[Assignment]], target: VarSet) -> MultiPoly:
    """Collapse copies: ``images[c][i]`` is where variable i of copy c goes."""
    assignment = [a for block in images for a in block]
    return substitute(p, assignment, target)


def along(g: GroupElement, copy_target: int = 0) -> list[Assignment]:
    """Assignment block y := g·x for one copy."""
    return [(g.entry(i) if g.exps[i] else 1, copy_target * g.n + i) for i in range(g.n)]


def fixed_part(g: GroupElement, copy_target: int = 0) -> list[Assignment]:
    """Assignment block y := x^g (x_i on Fix(g), 0 on moved indices)."""
    return [None if g.exps[i] else (1, copy_target * g.n + i) for i in range(g.n)]


def identity_block(n: int, copy_target: int = 0) -> list[Assignment]:
    return [(1, copy_target * n + i) for i in range(n)]
