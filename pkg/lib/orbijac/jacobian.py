"""Jacobian rings through Groebner bases.

Coefficients are QSeries. When every input coefficient is an exact constant
the computation is exact over Q(ζ_m); otherwise leading coefficients are
inverted as truncated Laurent series and every result is exact to the
tracked precision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from sympy.polys.monomials import monomial_div, monomial_divides, monomial_lcm
from sympy.polys.orderings import grevlex, lex

from .config import DEGREE_CAP, MIN_RELATIVE_PRECISION
from .errors import (
    GroebnerError,
    InvarianceError,
    NonIsolatedSingularityError,
    NotInvertibleError,
    PrecisionError,
)
from .poly import GroupElement, Monomial, MultiPoly, VarSet, act, partial_derivative
from .scalar import QSeries

logger = logging.getLogger(__name__)

ORDERS = {"grevlex": grevlex, "lex": lex}

EXACT = "exact_cyclotomic"
SERIES = "laurent_series"


def _order_key(order: str):
    try:
        return ORDERS[order]
    except KeyError:
        raise ValueError(f"unsupported monomial order {order!r}") from None


def leading_monomial(p: MultiPoly, order: str = "grevlex") -> Monomial:
    if p.is_zero():
        raise ValueError("zero polynomial has no leading monomial")
    return max(p.terms, key=_order_key(order))


def field_mode(polys: Sequence[MultiPoly]) -> str:
    exact = all(c.is_constant() for p in polys for c in p.terms.values())
    return EXACT if exact else SERIES


@dataclass(frozen=True, eq=False)
class GroebnerBasis:
    generators: tuple[MultiPoly, ...]
    order: str
    field_mode: str
    varset: VarSet
    m: int

    @cached_property
    def leading_monomials(self) -> tuple[Monomial, ...]:
        return tuple(leading_monomial(g, self.order) for g in self.generators)

    def __len__(self) -> int:
        return len(self.generators)


def _monic(p: MultiPoly, lm: Monomial) -> MultiPoly:
    lc = p.terms[lm]
    try:
        inv = lc.invert()
    except NotInvertibleError as e:
        raise GroebnerError(f"leading coefficient of {p} is not invertible: {e}") from e
    terms = {e: c * inv for e, c in p.terms.items() if e != lm}
    terms[lm] = QSeries.one(p.m)
    return MultiPoly(p.varset, p.m, terms)


def _reduce(p: MultiPoly, basis: Sequence[MultiPoly], lms: Sequence[Monomial], key) -> MultiPoly:
    """Full reduction of p by monic polynomials with leading monomials lms."""
    work = dict(p.terms)
    remainder: dict[Monomial, QSeries] = {}
    while work:
        mono = max(work, key=key)
        c = work.pop(mono)
        for g, lm in zip(basis, lms):
            quot = monomial_div(mono, lm)
            if quot is None:
                continue
            for e, gc in g.terms.items():
                if e == lm:
                    continue
                target = tuple(a + b for a, b in zip(e, quot))
                t = work.get(target)
                t = -(c * gc) if t is None else t - c * gc
                if t.is_zero():
                    work.pop(target, None)
                else:
                    work[target] = t
            break
        else:
            remainder[mono] = c
    return MultiPoly(p.varset, p.m, remainder)


def _spoly(f: MultiPoly, lf: Monomial, g: MultiPoly, lg: Monomial) -> MultiPoly:
    lcm = monomial_lcm(lf, lg)
    uf, ug = monomial_div(lcm, lf), monomial_div(lcm, lg)
    terms: dict[Monomial, QSeries] = {}
    for e, c in f.terms.items():
        if e != lf:
            k = tuple(a + b for a, b in zip(e, uf))
            terms[k] = terms[k] + c if k in terms else c
    for e, c in g.terms.items():
        if e != lg:
            k = tuple(a + b for a, b in zip(e, ug))
            terms[k] = terms[k] - c if k in terms else -c
    return MultiPoly(f.varset, f.m, terms)


def _check_precision(polys: Sequence[MultiPoly], mode: str, minimum: int) -> None:
    if mode != SERIES:
        return
    for p in polys:
        for e, c in p.terms.items():
            if c.relative_precision() < minimum:
                raise PrecisionError(
                    f"coefficient of {e} in {p} keeps only {c.relative_precision()} exponents "
                    f"(need {minimum}); increase precision"
                )


def buchberger(gens: Sequence[MultiPoly], order: str = "grevlex", *,
               min_relative_precision: int = MIN_RELATIVE_PRECISION) -> GroebnerBasis:
    """Reduced Groebner basis; deterministic for a given order and input order."""
    key = _order_key(order)
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ValueError("buchberger needs at least one nonzero generator")
    mode = field_mode(gens)
    basis: list[MultiPoly] = []
    lms: list[Monomial] = []
    for g in gens:
        lm = leading_monomial(g, order)
        basis.append(_monic(g, lm))
        lms.append(lm)
    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]
    processed = 0
    while pairs:
        pairs.sort(key=lambda ij: (sum(monomial_lcm(lms[ij[0]], lms[ij[1]])),
                                   key(monomial_lcm(lms[ij[0]], lms[ij[1]])), ij))
        i, j = pairs.pop(0)
        processed += 1
        lcm = monomial_lcm(lms[i], lms[j])
        if tuple(a + b for a, b in zip(lms[i], lms[j])) == lcm:
            continue
        r = _reduce(_spoly(basis[i], lms[i], basis[j], lms[j]), basis, lms, key)
        if r.is_zero():
            continue
        lm = leading_monomial(r, order)
        basis.append(_monic(r, lm))
        lms.append(lm)
        pairs.extend((k, len(basis) - 1) for k in range(len(basis) - 1))
    logger.debug("buchberger: %d pairs processed, %d polynomials before reduction", processed, len(basis))

    # minimal basis: drop elements whose leading monomial is a multiple of another's
    keep = []
    for i, lm in enumerate(lms):
        if any(monomial_divides(lms[j], lm) and (lms[j] != lm or j < i) for j in range(len(lms)) if j != i):
            continue
        keep.append(i)
    minimal = [basis[i] for i in keep]
    minimal_lms = [lms[i] for i in keep]
    reduced = []
    for idx, g in enumerate(minimal):
        others = [h for k, h in enumerate(minimal) if k != idx]
        other_lms = [l for k, l in enumerate(minimal_lms) if k != idx]
        tail = MultiPoly(g.varset, g.m, {e: c for e, c in g.terms.items() if e != minimal_lms[idx]})
        tail = _reduce(tail, others, other_lms, key)
        terms = dict(tail.terms)
        terms[minimal_lms[idx]] = QSeries.one(g.m)
        reduced.append(MultiPoly(g.varset, g.m, terms))
    reduced.sort(key=lambda g: key(leading_monomial(g, order)))
    _check_precision(reduced, mode, min_relative_precision)
    return GroebnerBasis(tuple(reduced), order, mode, gens[0].varset, gens[0].m)


def empty_basis(varset: VarSet, m: int, order: str = "grevlex") -> GroebnerBasis:
    return GroebnerBasis((), order, EXACT, varset, m)


def normal_form(p: MultiPoly, gb: GroebnerBasis) -> MultiPoly:
    if not gb.generators:
        return p
    return _reduce(p, gb.generators, gb.leading_monomials, _order_key(gb.order))


@dataclass(frozen=True, eq=False)
class JacobianRing:
    potential: MultiPoly
    gb: GroebnerBasis
    degree_cap: int = DEGREE_CAP

    @property
    def varset(self) -> VarSet:
        return self.potential.varset

    @property
    def m(self) -> int:
        return self.potential.m

    @cached_property
    def basis(self) -> tuple[Monomial, ...]:
        """Standard monomials, by degree then by the ring's order."""
        nvars = self.varset.size
        lms = self.gb.leading_monomials
        layer = [(0,) * nvars]
        found = list(layer)
        for degree in range(1, self.degree_cap + 1):
            nxt = set()
            for mono in layer:
                for i in range(nvars):
                    cand = mono[:i] + (mono[i] + 1,) + mono[i + 1:]
                    if not any(monomial_divides(lm, cand) for lm in lms):
                        nxt.add(cand)
            if not nxt:
                return tuple(found)
            layer = sorted(nxt, key=_order_key(self.gb.order), reverse=True)
            found.extend(layer)
        raise NonIsolatedSingularityError(
            f"standard monomials reach degree {self.degree_cap}; {self.potential} "
            "does not have an isolated singularity"
        )

    def normal_form(self, p: MultiPoly) -> MultiPoly:
        return normal_form(p, self.gb)

    def coordinates(self, p: MultiPoly) -> dict[Monomial, QSeries]:
        return dict(self.normal_form(p).terms)


def jacobian_ring(W: MultiPoly, order: str = "grevlex", *, degree_cap: int = DEGREE_CAP,
                  min_relative_precision: int = MIN_RELATIVE_PRECISION) -> JacobianRing:
    gens = [partial_derivative(W, i) for i in range(W.varset.size)]
    gens = [g for g in gens if not g.is_zero()]
    if gens:
        gb = buchberger(gens, order, min_relative_precision=min_relative_precision)
    else:
        gb = empty_basis(W.varset, W.m, order)
    return JacobianRing(W, gb, degree_cap)


def restrict_to_fixed(W: MultiPoly, h: GroupElement) -> MultiPoly:
    """W^h: W on Fix(h), in the fixed variables only."""
    if act(h, W) != W:
        raise InvarianceError(f"potential is not invariant under {h}")
    return W.restrict(h.fixed)


def milnor_number(jr: JacobianRing) -> int:
    return len(jr.basis)
