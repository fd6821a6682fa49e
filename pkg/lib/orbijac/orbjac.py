"""Twisted and orbifold Jacobian algebras of (W, H) for diagonal abelian H.

The twisted algebra is ⊕_h Jac(W^h)·ξ_h with

    φ_g ξ_g • φ_h ξ_h = ⌊φ_g⌋_{gh} ⌊φ_h⌋_{gh} σ_{g,h} ξ_{gh},

where σ_{g,h} is the ∂θ_{I_gh} coefficient of

    1/d! · Υ( (⌊H_W(x,g·x,x)⌋ + ⌊H_{W,g}(x)⌋⊗1 + 1⊗⌊H_{W,h}(g·x)⌋)^d ⊗ ∂θ_{I_g} ⊗ ∂θ_{I_h} ),

d = (d_g + d_h - d_gh)/2, and σ_{g,h} = 0 when that is not an integer.
The orbifold Jacobian algebra is the H-invariant part.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

from sympy.polys.domains import QQ

from .cliff import DTHETA, THETA, ExtElem, TensorExtElem, coefficient_of, power, upsilon
from .config import CONVENTIONS, Conventions
from .errors import OrbijacError
from .jacobian import JacobianRing, jacobian_ring, restrict_to_fixed
from .poly import (
    DiagonalGroup,
    GroupElement,
    MultiPoly,
    VarSet,
    along,
    diff_quotient,
    fixed_part,
    identity_block,
    restrict_copy,
    substitute,
)
from .scalar import INF, CycNum, QSeries

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# H_W and H_{W,g}
# ---------------------------------------------------------------------------

def build_HW(W: MultiPoly) -> TensorExtElem:
    """Σ_{j≤i} ∇_j^{y→(y,z)} ∇_i^{x→(x,y)}(W) θ_i⊗θ_j over the tripled ring."""
    vs = W.varset
    if vs.copies != 1:
        raise ValueError("H_W is built from a potential in one copy of the variables")
    tripled = vs.with_copies(3)
    terms = {}
    for i in range(vs.n):
        first = diff_quotient(W, i, source=0, target=1, convention="head")
        for j in range(i + 1):
            second = diff_quotient(first, j, source=1, target=2, convention="head")
            if not second.is_zero():
                terms[((i,), (j,))] = second
    return TensorExtElem(vs.n, tripled, W.m, terms)


def evaluate_HW(hw: TensorExtElem, g: GroupElement, target: VarSet) -> TensorExtElem:
    """H_W(x, g·x, x) in one copy of the variables."""
    n = target.n
    images = [identity_block(n), along(g), identity_block(n)]
    return hw.map_coefficients(lambda c: restrict_copy(c, images, target), target)


def build_HWg(W: MultiPoly, g: GroupElement, conventions: Conventions = CONVENTIONS) -> ExtElem:
    """Σ_{i,j∈I_g, j<i} 1/(1-g_j) ∇_j^{x→(x,x^g)} ∇_i^{x→(x,g·x)}(W) θθ."""
    vs = W.varset
    n = vs.n
    out = ExtElem.zero(n, THETA, vs, W.m)
    moved = g.moved
    for i in moved:
        first = diff_quotient(W, i, source=0, target=1, convention="head")
        first = restrict_copy(first, [identity_block(n), along(g)], vs)
        for j in moved:
            if j >= i:
                continue
            second = diff_quotient(first, j, source=0, target=1, convention="head")
            second = restrict_copy(second, [identity_block(n), fixed_part(g)], vs)
            if second.is_zero():
                continue
            factor = (1 - g.entry(j)).inverse()
            word = (i, j) if conventions.hwg_order == "descending" else (j, i)
            out = out + ExtElem.word(n, THETA, word, vs, W.m, second.scale(factor))
    return out


def floor_to(p: MultiPoly, h: GroupElement) -> MultiPoly:
    """⌊p⌋_h: set the variables moved by h to zero (same ring)."""
    n = p.varset.n
    assignment = [None if h.exps[i] else (1, i) for i in range(n)]
    return substitute(p, assignment, p.varset)


def d_pair(g: GroupElement, h: GroupElement) -> tuple[int, bool]:
    """(d_g + d_h - d_gh, whether it is even)."""
    total = g.d + h.d - (g * h).d
    return total, total % 2 == 0


def xi_action(h: GroupElement, g: GroupElement) -> CycNum:
    """Scalar by which h acts on ξ_g: ∏ h_i^{-1} over i ∈ I_h ∩ I_g."""
    k = -sum(h.exps[i] for i in g.moved if h.exps[i])
    return CycNum.root(h.m, k)


# ---------------------------------------------------------------------------
# Sectors and elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Sector:
    h: GroupElement
    jac: JacobianRing

    @property
    def d(self) -> int:
        return self.h.d

    @property
    def parity(self) -> int:
        return self.h.parity

    @property
    def varset(self) -> VarSet:
        return self.jac.varset


@dataclass(frozen=True, eq=False)
class TwistedElement:
    """Σ_h φ_h ξ_h with φ_h over the fixed variables of h."""

    components: Mapping[GroupElement, MultiPoly] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", {h: p for h, p in self.components.items() if not p.is_zero()})

    def __add__(self, other: "TwistedElement") -> "TwistedElement":
        out = dict(self.components)
        for h, p in other.components.items():
            out[h] = out[h] + p if h in out else p
        return TwistedElement(out)

    def __neg__(self) -> "TwistedElement":
        return TwistedElement({h: -p for h, p in self.components.items()})

    def __sub__(self, other: "TwistedElement") -> "TwistedElement":
        return self + (-other)

    def scale(self, c) -> "TwistedElement":
        return TwistedElement({h: p.scale(c) for h, p in self.components.items()})

    def is_zero(self) -> bool:
        return not self.components

    def compare(self, other: "TwistedElement") -> tuple[bool, float]:
        ok, eff = True, INF
        for h in set(self.components) | set(other.components):
            a, b = self.components.get(h), other.components.get(h)
            if a is None:
                a = MultiPoly.zero(b.varset, b.m)
            if b is None:
                b = MultiPoly.zero(a.varset, a.m)
            same, p = a.compare(b)
            ok, eff = ok and same, min(eff, p)
        return ok, eff

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwistedElement):
            return NotImplemented
        return self.compare(other)[0]

    def __str__(self) -> str:
        if not self.components:
            return "0"
        return " + ".join(f"[{p}]·ξ{h.exps}" for h, p in self.components.items())

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Twisted algebra
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class TwistedJacAlgebra:
    W: MultiPoly
    group: DiagonalGroup
    sectors: dict[GroupElement, Sector]
    order: str = "grevlex"
    conventions: Conventions = CONVENTIONS
    sigma_table: dict[tuple[GroupElement, GroupElement], MultiPoly] = field(default_factory=dict)
    _hw: TensorExtElem | None = None
    _hwg: dict = field(default_factory=dict)

    @property
    def varset(self) -> VarSet:
        return self.W.varset

    @property
    def m(self) -> int:
        return self.W.m

    def key(self, h: GroupElement) -> str:
        return self.group.key(h)

    def hw(self) -> TensorExtElem:
        if self._hw is None:
            self._hw = build_HW(self.W)
        return self._hw

    def hwg(self, g: GroupElement) -> ExtElem:
        if g not in self._hwg:
            self._hwg[g] = build_HWg(self.W, g, self.conventions)
        return self._hwg[g]

    def sigma(self, g: GroupElement, h: GroupElement) -> MultiPoly:
        pair = (g, h)
        if pair not in self.sigma_table:
            started = time.monotonic()
            self.sigma_table[pair] = _sigma(self, g, h)
            logger.debug("sigma %s,%s computed in %.2fs", self.key(g), self.key(h), time.monotonic() - started)
        return self.sigma_table[pair]

    def compute_table(self) -> None:
        for g in self.group:
            for h in self.group:
                self.sigma(g, h)

    def element(self, h: GroupElement, poly: MultiPoly | None = None) -> TwistedElement:
        sector = self.sectors[h]
        if poly is None:
            poly = MultiPoly.one(sector.varset, self.m)
        return TwistedElement({h: sector.jac.normal_form(poly)})

    def unit(self) -> TwistedElement:
        return self.element(self.group.identity)

    def lift(self, h: GroupElement, p: MultiPoly) -> MultiPoly:
        """A polynomial on Fix(h) viewed in all variables."""
        return p.embed(self.varset, h.fixed)

    def product(self, a: TwistedElement, b: TwistedElement) -> TwistedElement:
        out = TwistedElement()
        for g, pg in a.components.items():
            for h, ph in b.components.items():
                gh = g * h
                s = self.sigma(g, h)
                if s.is_zero():
                    continue
                fixed = gh.fixed
                left = self.lift(g, pg).restrict(fixed)
                right = self.lift(h, ph).restrict(fixed)
                value = self.sectors[gh].jac.normal_form(left * right * s)
                out = out + TwistedElement({gh: value})
        return out


def _sigma(alg: TwistedJacAlgebra, g: GroupElement, h: GroupElement) -> MultiPoly:
    gh = g * h
    target = alg.sectors[gh]
    total, even = d_pair(g, h)
    if not even:
        return MultiPoly.zero(target.varset, alg.m)
    d = total // 2
    vs, n, m = alg.varset, alg.varset.n, alg.m

    hw = evaluate_HW(alg.hw(), g, vs).map_coefficients(lambda c: floor_to(c, gh))
    hwg = alg.hwg(g).map_coefficients(lambda c: floor_to(c, gh))
    gx = [along(g)]
    hwh = alg.hwg(h).map_coefficients(lambda c: floor_to(restrict_copy(c, gx, vs), gh))
    X = hw + TensorExtElem.left(hwg) + TensorExtElem.right(hwh)

    Xd = power(X, d).scale(QQ(1, math.factorial(d)))
    q1 = ExtElem.word(n, DTHETA, g.moved, vs, m)
    q2 = ExtElem.word(n, DTHETA, h.moved, vs, m)
    contracted = upsilon(Xd, q1, q2, sign=alg.conventions.upsilon_sign)
    coeff = coefficient_of(contracted, gh.moved)
    return target.jac.normal_form(coeff.restrict(gh.fixed))


def twisted_algebra(W: MultiPoly, group: DiagonalGroup, order: str = "grevlex",
                    conventions: Conventions = CONVENTIONS) -> TwistedJacAlgebra:
    sectors = {}
    for h in group:
        Wh = restrict_to_fixed(W, h)
        sectors[h] = Sector(h, jacobian_ring(Wh, order))
    return TwistedJacAlgebra(W, group, sectors, order, conventions)


def sigma(g: GroupElement, h: GroupElement, W: MultiPoly, group: DiagonalGroup,
          conventions: Conventions = CONVENTIONS) -> MultiPoly:
    """σ_{g,h} as a normal form in Jac(W^{gh})."""
    return twisted_algebra(W, group, conventions=conventions).sigma(g, h)


def product(alg: TwistedJacAlgebra, a: TwistedElement, b: TwistedElement) -> TwistedElement:
    return alg.product(a, b)


# ---------------------------------------------------------------------------
# Orbifold Jacobian algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisElement:
    h: GroupElement
    monomial: tuple[int, ...]


@dataclass(eq=False)
class OrbJacAlgebra:
    twisted: TwistedJacAlgebra
    basis: tuple[BasisElement, ...]
    table: dict[tuple[int, int], dict[int, QSeries]] = field(default_factory=dict)

    def parity(self, index: int) -> int:
        return self.basis[index].h.parity

    def element(self, index: int) -> TwistedElement:
        b = self.basis[index]
        sector = self.twisted.sectors[b.h]
        return TwistedElement({b.h: MultiPoly.monomial(sector.varset, self.twisted.m, b.monomial)})

    def coordinates(self, x: TwistedElement) -> dict[int, QSeries]:
        lookup = {(b.h, b.monomial): k for k, b in enumerate(self.basis)}
        out: dict[int, QSeries] = {}
        for h, poly in x.components.items():
            for mono, c in poly.terms.items():
                k = lookup.get((h, mono))
                if k is None:
                    raise OrbijacError(f"product leaves the invariant part: {mono} in sector {self.twisted.key(h)}")
                out[k] = c
        return out

    def multiply(self, a: int, b: int) -> dict[int, QSeries]:
        if (a, b) not in self.table:
            prod = self.twisted.product(self.element(a), self.element(b))
            self.table[(a, b)] = self.coordinates(prod)
        return self.table[(a, b)]

    def compute_table(self) -> None:
        for a in range(len(self.basis)):
            for b in range(len(self.basis)):
                self.multiply(a, b)

    def dims(self) -> dict[GroupElement, int]:
        out = {h: 0 for h in self.twisted.group}
        for b in self.basis:
            out[b.h] += 1
        return out

    def to_json(self) -> dict:
        alg = self.twisted
        basis = [
            {"index": k, "sector": alg.key(b.h), "monomial": list(b.monomial), "parity": b.h.parity}
            for k, b in enumerate(self.basis)
        ]
        self.compute_table()
        entries = []
        for (a, b), coords in sorted(self.table.items()):
            entries.append({
                "a": a,
                "b": b,
                "product": [{"index": k, "coeff": c.to_json()} for k, c in sorted(coords.items())],
            })
        return {"basis": basis, "table": entries}


def invariant_part(twisted: TwistedJacAlgebra) -> OrbJacAlgebra:
    """Standard monomials φ·ξ_g fixed by every generator of H."""
    basis = []
    n = twisted.varset.n
    for g in twisted.group:
        sector = twisted.sectors[g]
        for mono in sector.jac.basis:
            full = [0] * n
            for pos, k in zip(g.fixed, mono):
                full[pos] = k
            if all(h.scale_of(full) * xi_action(h, g) == 1 for h in twisted.group.generators):
                basis.append(BasisElement(g, mono))
    logger.debug("invariant part has dimension %d", len(basis))
    return OrbJacAlgebra(twisted, tuple(basis))


def check_algebra(orb: OrbJacAlgebra) -> dict:
    """Unit, graded commutativity and associativity on the basis."""
    alg = orb.twisted
    size = len(orb.basis)
    elems = [orb.element(k) for k in range(size)]
    unit = alg.unit()
    res: dict = {"ok": True}

    failures = []
    for k, x in enumerate(elems):
        for left, right in ((unit, x), (x, unit)):
            if alg.product(left, right) != x:
                failures.append({"element": k})
                break
    res["unit"] = {"ok": not failures, "failures": failures}

    failures = []
    products = {}
    for a in range(size):
        for b in range(size):
            products[(a, b)] = alg.product(elems[a], elems[b])
    for a in range(size):
        for b in range(a + 1, size):
            sign = -1 if orb.parity(a) * orb.parity(b) else 1
            lhs = products[(a, b)]
            rhs = products[(b, a)].scale(sign)
            if lhs != rhs:
                failures.append({"a": a, "b": b})
    res["graded_commutativity"] = {"ok": not failures, "failures": failures}

    failures = []
    for a in range(size):
        for b in range(size):
            for c in range(size):
                lhs = alg.product(products[(a, b)], elems[c])
                rhs = alg.product(elems[a], products[(b, c)])
                if lhs != rhs:
                    failures.append({"a": a, "b": b, "c": c})
    res["associativity"] = {"ok": not failures, "failures": failures}
    res["ok"] = all(res[k]["ok"] for k in ("unit", "graded_commutativity", "associativity"))
    return res
