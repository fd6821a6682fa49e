"""Exterior and Clifford algebra on θ_1..θ_n, ∂θ_1..∂θ_n.

Exterior elements store ascending index subsets with polynomial coefficients;
the sign of a word is fixed by counting inversions when it is sorted.
Cl_n acts on k[∂θ] through Cl_n / Cl_n·⟨θ⟩: a word is straightened so that
all ∂θ stand left of all θ, and words with θ left over are dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .poly import MultiPoly, Scalar, VarSet
from .scalar import CycNum, QSeries, Rational

logger = logging.getLogger(__name__)

THETA = "theta"
DTHETA = "dtheta"
SIDES = (THETA, DTHETA)

# |θ_i| = -1, |∂θ_i| = +1
THETA_DEGREE = -1

Subset = tuple[int, ...]


def sort_sign(word: Sequence[int]) -> tuple[int, Subset | None]:
    """Sign and ascending subset of an exterior word; (0, None) on a repeat."""
    if len(set(word)) != len(word):
        return 0, None
    inversions = sum(1 for a in range(len(word)) for b in range(a + 1, len(word)) if word[a] > word[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(word))


def merge_sign(left: Subset, right: Subset) -> tuple[int, Subset | None]:
    return sort_sign(tuple(left) + tuple(right))


# ---------------------------------------------------------------------------
# Exterior elements with polynomial coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtElem:
    n: int
    side: str
    varset: VarSet
    m: int
    terms: Mapping[Subset, MultiPoly] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self) -> None:
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        clean = {}
        for subset, c in self.terms.items():
            if not isinstance(c, MultiPoly):
                c = MultiPoly.constant(self.varset, self.m, c)
            if any(i < 0 or i >= self.n for i in subset):
                raise ValueError(f"index out of range in {subset}")
            sign, canon = sort_sign(subset)
            if canon is None or c.is_zero():
                continue
            c = c if sign == 1 else -c
            clean[canon] = clean[canon] + c if canon in clean else c
        object.__setattr__(self, "terms", {s: c for s, c in clean.items() if not c.is_zero()})

    @classmethod
    def word(cls, n: int, side: str, indices: Sequence[int], varset: VarSet, m: int,
             coeff: Scalar | MultiPoly = 1) -> "ExtElem":
        """The product of generators in the given order, e.g. ∂θ_2∂θ_1 = -∂θ_1∂θ_2."""
        return cls(n, side, varset, m, {tuple(indices): coeff})

    @classmethod
    def zero(cls, n: int, side: str, varset: VarSet, m: int) -> "ExtElem":
        return cls(n, side, varset, m, {})

    def _like(self, terms) -> "ExtElem":
        return ExtElem(self.n, self.side, self.varset, self.m, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree_of(self, subset: Subset) -> int:
        return len(subset) * (THETA_DEGREE if self.side == THETA else 1)

    def __add__(self, other: "ExtElem") -> "ExtElem":
        if not isinstance(other, ExtElem):
            return NotImplemented
        out = dict(self.terms)
        for s, c in other.terms.items():
            out[s] = out[s] + c if s in out else c
        return self._like(out)

    def __neg__(self) -> "ExtElem":
        return self._like({s: -c for s, c in self.terms.items()})

    def __sub__(self, other: "ExtElem") -> "ExtElem":
        return self + (-other)

    def scale(self, c) -> "ExtElem":
        return self._like({s: a * c for s, a in self.terms.items()})

    def __mul__(self, other) -> "ExtElem":
        """Exterior product on the same side; scalars and polynomials scale."""
        if isinstance(other, (int, Rational, CycNum, QSeries, MultiPoly)):
            return self.scale(other)
        if not isinstance(other, ExtElem) or other.side != self.side:
            return NotImplemented
        out: dict[Subset, MultiPoly] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                sign, s = merge_sign(a, b)
                if s is None:
                    continue
                t = ca * cb
                t = t if sign == 1 else -t
                out[s] = out[s] + t if s in out else t
        return self._like(out)

    def __rmul__(self, other) -> "ExtElem":
        return self.scale(other)

    def map_coefficients(self, fn, varset: VarSet | None = None) -> "ExtElem":
        vs = varset or self.varset
        return ExtElem(self.n, self.side, vs, self.m, {s: fn(c) for s, c in self.terms.items()})

    def compare(self, other: "ExtElem") -> tuple[bool, float]:
        zero = MultiPoly.zero(self.varset, self.m)
        ok, eff = True, float("inf")
        for s in set(self.terms) | set(other.terms):
            same, p = self.terms.get(s, zero).compare(other.terms.get(s, zero))
            ok, eff = ok and same, min(eff, p)
        return ok, eff

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtElem):
            return NotImplemented
        return self.side == other.side and self.compare(other)[0]

    def __str__(self) -> str:
        gen = "θ" if self.side == THETA else "∂θ"
        if not self.terms:
            return "0"
        return " + ".join(
            f"({c})" + "".join(f"*{gen}{i + 1}" for i in s) for s, c in sorted(self.terms.items())
        )

    __repr__ = __str__


def coefficient_of(e: ExtElem, subset: Iterable[int]) -> MultiPoly:
    sign, canon = sort_sign(tuple(subset))
    if canon is None:
        return MultiPoly.zero(e.varset, e.m)
    c = e.terms.get(canon)
    if c is None:
        return MultiPoly.zero(e.varset, e.m)
    return c if sign == 1 else -c


# ---------------------------------------------------------------------------
# Clifford straightening
# ---------------------------------------------------------------------------

D = "d"  # ∂θ
T = "t"  # θ

Letter = tuple[str, int]


def _reducible(word: tuple[Letter, ...], pos: int) -> bool:
    (ka, a), (kb, b) = word[pos], word[pos + 1]
    if ka == T and kb == D:
        return True
    return ka == kb and a >= b


def normal_order(word: Sequence[Letter], strategy: str = "leftmost") -> dict[tuple[Subset, Subset], int]:
    """Straighten a Clifford word to Σ c · ∂θ_D θ_T with D, T ascending.

    Rules: θ_i∂θ_j = -∂θ_jθ_i + δ_ij, and anticommutation with squares zero
    inside each kind. ``strategy`` picks the leftmost or rightmost redex.
    """
    if strategy not in ("leftmost", "rightmost"):
        raise ValueError(f"unknown strategy {strategy!r}")
    pending: list[tuple[int, tuple[Letter, ...]]] = [(1, tuple(word))]
    result: dict[tuple[Subset, Subset], int] = {}
    while pending:
        coeff, w = pending.pop()
        positions = range(len(w) - 1) if strategy == "leftmost" else range(len(w) - 2, -1, -1)
        pos = next((p for p in positions if _reducible(w, p)), None)
        if pos is None:
            key = (tuple(i for k, i in w if k == D), tuple(i for k, i in w if k == T))
            result[key] = result.get(key, 0) + coeff
            continue
        (ka, a), (kb, b) = w[pos], w[pos + 1]
        head, tail = w[:pos], w[pos + 2:]
        if ka == kb:
            if a == b:
                continue
            pending.append((-coeff, head + (w[pos + 1], w[pos]) + tail))
        else:
            pending.append((-coeff, head + (w[pos + 1], w[pos]) + tail))
            if a == b:
                pending.append((coeff, head + tail))
    return {k: c for k, c in result.items() if c}


@lru_cache(maxsize=None)
def _act_words(thetas: Subset, dthetas: Subset) -> tuple[tuple[Subset, int], ...]:
    word = [(T, i) for i in thetas] + [(D, i) for i in dthetas]
    out = normal_order(word)
    return tuple((d, c) for (d, t), c in sorted(out.items()) if not t)


def clifford_act(p: ExtElem, q: ExtElem) -> ExtElem:
    """p(θ) acting on q(∂θ) in Cl_n / Cl_n·⟨θ⟩."""
    if p.side != THETA or q.side != DTHETA:
        raise ValueError("clifford_act needs a θ element acting on a ∂θ element")
    if p.n != q.n:
        raise ValueError("generator counts differ")
    out: dict[Subset, MultiPoly] = {}
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            for d, sign in _act_words(a, b):
                t = ca * cb
                t = t if sign == 1 else -t
                out[d] = out[d] + t if d in out else t
    return ExtElem(q.n, DTHETA, q.varset, q.m, out)


# ---------------------------------------------------------------------------
# Graded tensor product k[θ] ⊗ k[θ]
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TensorExtElem:
    n: int
    varset: VarSet
    m: int
    terms: Mapping[tuple[Subset, Subset], MultiPoly] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self) -> None:
        clean = {}
        for (left, right), c in self.terms.items():
            if not isinstance(c, MultiPoly):
                c = MultiPoly.constant(self.varset, self.m, c)
            sl, cl = sort_sign(left)
            sr, cr = sort_sign(right)
            if cl is None or cr is None or c.is_zero():
                continue
            c = c if sl * sr == 1 else -c
            key = (cl, cr)
            clean[key] = clean[key] + c if key in clean else c
        object.__setattr__(self, "terms", {k: c for k, c in clean.items() if not c.is_zero()})

    @classmethod
    def unit(cls, n: int, varset: VarSet, m: int) -> "TensorExtElem":
        return cls(n, varset, m, {((), ()): 1})

    @classmethod
    def basic(cls, n: int, varset: VarSet, m: int, left: Sequence[int], right: Sequence[int],
              coeff: Scalar | MultiPoly = 1) -> "TensorExtElem":
        return cls(n, varset, m, {(tuple(left), tuple(right)): coeff})

    @classmethod
    def left(cls, e: ExtElem) -> "TensorExtElem":
        """e ⊗ 1"""
        return cls(e.n, e.varset, e.m, {(s, ()): c for s, c in e.terms.items()})

    @classmethod
    def right(cls, e: ExtElem) -> "TensorExtElem":
        """1 ⊗ e"""
        return cls(e.n, e.varset, e.m, {((), s): c for s, c in e.terms.items()})

    def _like(self, terms) -> "TensorExtElem":
        return TensorExtElem(self.n, self.varset, self.m, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_even(self) -> bool:
        return all((len(l) + len(r)) % 2 == 0 for l, r in self.terms)

    def __add__(self, other: "TensorExtElem") -> "TensorExtElem":
        if not isinstance(other, TensorExtElem):
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return self._like(out)

    def __neg__(self) -> "TensorExtElem":
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "TensorExtElem") -> "TensorExtElem":
        return self + (-other)

    def scale(self, c) -> "TensorExtElem":
        return self._like({k: a * c for k, a in self.terms.items()})

    def map_coefficients(self, fn, varset: VarSet | None = None) -> "TensorExtElem":
        vs = varset or self.varset
        return TensorExtElem(self.n, vs, self.m, {k: fn(c) for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, TensorExtElem):
            return tensor_mul(self, other)
        if isinstance(other, (int, Rational, CycNum, QSeries, MultiPoly)):
            return self.scale(other)
        return NotImplemented

    def compare(self, other: "TensorExtElem") -> tuple[bool, float]:
        zero = MultiPoly.zero(self.varset, self.m)
        ok, eff = True, float("inf")
        for k in set(self.terms) | set(other.terms):
            same, p = self.terms.get(k, zero).compare(other.terms.get(k, zero))
            ok, eff = ok and same, min(eff, p)
        return ok, eff

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorExtElem):
            return NotImplemented
        return self.compare(other)[0]

    def __str__(self) -> str:
        if not self.terms:
            return "0"

        def w(s):
            return "".join(f"θ{i + 1}" for i in s) or "1"

        return " + ".join(f"({c})*{w(l)}⊗{w(r)}" for (l, r), c in sorted(self.terms.items()))

    __repr__ = __str__


def tensor_mul(a: TensorExtElem, b: TensorExtElem, theta_degree: int = THETA_DEGREE) -> TensorExtElem:
    """(p1⊗p2)(p1'⊗p2') = (-1)^{|p2||p1'|} p1p1' ⊗ p2p2'."""
    if a.varset != b.varset or a.n != b.n:
        raise ValueError("tensor factors over different rings")
    out: dict[tuple[Subset, Subset], MultiPoly] = {}
    for (l1, r1), c1 in a.terms.items():
        for (l2, r2), c2 in b.terms.items():
            sl, left = merge_sign(l1, l2)
            if left is None:
                continue
            sr, right = merge_sign(r1, r2)
            if right is None:
                continue
            koszul = -1 if (len(r1) * theta_degree) * (len(l2) * theta_degree) % 2 else 1
            t = c1 * c2
            if sl * sr * koszul == -1:
                t = -t
            key = (left, right)
            out[key] = out[key] + t if key in out else t
    return a._like(out)


def power(a: TensorExtElem, k: int) -> TensorExtElem:
    if k < 0:
        raise ValueError("negative power")
    if not a.is_even():
        raise ValueError("power needs an element of even total degree")
    result = TensorExtElem.unit(a.n, a.varset, a.m)
    for _ in range(k):
        result = tensor_mul(result, a)
    return result


def upsilon(t: TensorExtElem, q1: ExtElem, q2: ExtElem, *, sign: bool = True) -> ExtElem:
    """Υ(p1⊗p2 ⊗ q1 ⊗ q2) = (-1)^{|q1||p2|} p1(q1)·p2(q2), extended bilinearly."""
    if q1.side != DTHETA or q2.side != DTHETA:
        raise ValueError("Υ contracts against ∂θ elements")
    out: dict[Subset, MultiPoly] = {}
    for (left, right), c in t.terms.items():
        for b1, c1 in q1.terms.items():
            s = -1 if sign and (len(b1) * len(right)) % 2 else 1
            first = _act_words(left, b1)
            if not first:
                continue
            for b2, c2 in q2.terms.items():
                second = _act_words(right, b2)
                if not second:
                    continue
                base = c * c1 * c2
                for d1, s1 in first:
                    for d2, s2 in second:
                        sm, d = merge_sign(d1, d2)
                        if d is None:
                            continue
                        term = base if s * s1 * s2 * sm == 1 else -base
                        out[d] = out[d] + term if d in out else term
    return ExtElem(t.n, DTHETA, t.varset, t.m, out)
