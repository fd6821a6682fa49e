"""Koszul matrix factorizations, the diagonal kernel Δ_W and its
equivariant versions, sector complexes and the 8×8 template check.

Module generators are θ-subsets in binary-counter order: bit i of the index
is θ_{i+1}. Wedge and contraction by θ_i carry the sign (-1)^{#{s∈S: s<i}}.
Matrices are numpy object arrays of MultiPoly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy.polys.domains import QQ

from .errors import InvarianceError, MatrixFactorizationError
from .poly import (
    DiagonalGroup,
    GroupElement,
    MultiPoly,
    VarSet,
    act,
    along,
    diff_quotient,
    identity_block,
    partial_derivative,
    restrict_copy,
)
from .scalar import INF, CycNum

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Subset basis
# ---------------------------------------------------------------------------

def subsets(n: int) -> list[tuple[int, ...]]:
    return [tuple(i for i in range(n) if k >> i & 1) for k in range(1 << n)]


def subset_index(s: Sequence[int]) -> int:
    return sum(1 << i for i in s)


def _sign(k: int, i: int) -> int:
    return -1 if bin(k & ((1 << i) - 1)).count("1") % 2 else 1


@lru_cache(maxsize=None)
def wedge_matrix(n: int, i: int) -> np.ndarray:
    size = 1 << n
    out = np.zeros((size, size), dtype=int)
    for k in range(size):
        if not k >> i & 1:
            out[k | 1 << i, k] = _sign(k, i)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def contraction_matrix(n: int, i: int) -> np.ndarray:
    size = 1 << n
    out = np.zeros((size, size), dtype=int)
    for k in range(size):
        if k >> i & 1:
            out[k ^ 1 << i, k] = _sign(k, i)
    out.setflags(write=False)
    return out


def zero_matrix(size: int, ring: VarSet, m: int) -> np.ndarray:
    return np.full((size, size), MultiPoly.zero(ring, m), dtype=object)


def _accumulate(target: np.ndarray, signs: np.ndarray, coeff: MultiPoly) -> None:
    if coeff.is_zero():
        return
    neg = -coeff
    for r, c in zip(*np.nonzero(signs)):
        target[r, c] = target[r, c] + (coeff if signs[r, c] == 1 else neg)


def residual(square: np.ndarray, potential: MultiPoly) -> tuple[list[tuple[int, int, MultiPoly]], float]:
    """Entries where square differs from potential·Id, and the effective precision."""
    zero = MultiPoly.zero(potential.varset, potential.m)
    bad = []
    eff = INF
    size = square.shape[0]
    for r in range(size):
        for c in range(size):
            expected = potential if r == c else zero
            ok, p = square[r, c].compare(expected)
            eff = min(eff, p)
            if not ok:
                bad.append((r, c, square[r, c] - expected))
    return bad, eff


def _entries_json(entries) -> list[dict]:
    return [{"row": int(r), "col": int(c), "poly": p.to_json()} for r, c, p in entries]


# ---------------------------------------------------------------------------
# Matrix factorizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixFactorization:
    n: int
    ring: VarSet
    m: int
    diff: np.ndarray
    potential: MultiPoly
    a: tuple[MultiPoly, ...] = ()
    b: tuple[MultiPoly, ...] = ()
    W: MultiPoly | None = None

    @property
    def rank(self) -> int:
        return 1 << self.n

    def square(self) -> np.ndarray:
        return self.diff @ self.diff

    def parity_ok(self) -> bool:
        for r in range(self.rank):
            for c in range(self.rank):
                if bin(r).count("1") % 2 == bin(c).count("1") % 2 and not self.diff[r, c].is_zero():
                    return False
        return True

    def check(self) -> dict:
        bad, eff = residual(self.square(), self.potential)
        parity = self.parity_ok()
        return {
            "ok": not bad and parity,
            "squares_ok": not bad,
            "parity_ok": parity,
            "precision": None if eff == INF else int(eff),
            "residual": _entries_json(bad[:4]),
        }

    def verify(self) -> "MatrixFactorization":
        bad, _ = residual(self.square(), self.potential)
        if bad:
            r, c, p = bad[0]
            raise MatrixFactorizationError(f"d² - potential·Id has entry {p} at ({r}, {c})", entry=(r, c))
        return self


def _ring_of(polys: Sequence[MultiPoly]) -> tuple[VarSet, int]:
    if not polys:
        raise ValueError("need at least one coefficient to fix the ring")
    return polys[0].varset, polys[0].m


def koszul_mf(a: Sequence[MultiPoly], b: Sequence[MultiPoly], *, check: bool = True,
              W: MultiPoly | None = None) -> MatrixFactorization:
    """δ = Σ b_j ι_j + Σ a_j ε_j on R[θ_1..θ_n], potential Σ a_j b_j."""
    if len(a) != len(b):
        raise ValueError(f"koszul_mf needs vectors of equal length, got {len(a)} and {len(b)}")
    ring, m = _ring_of(list(a) + list(b))
    n = len(a)
    diff = zero_matrix(1 << n, ring, m)
    potential = MultiPoly.zero(ring, m)
    for j in range(n):
        _accumulate(diff, contraction_matrix(n, j), b[j])
        _accumulate(diff, wedge_matrix(n, j), a[j])
        potential = potential + a[j] * b[j]
    mf = MatrixFactorization(n, ring, m, diff, potential, tuple(a), tuple(b), W)
    return mf.verify() if check else mf


def koszul_complex(W: MultiPoly) -> MatrixFactorization:
    """R[θ] with Σ ∂_iW·ι_i; a complex, so the potential is 0."""
    n = W.varset.n
    zero = MultiPoly.zero(W.varset, W.m)
    b = [partial_derivative(W, i) for i in range(n)]
    return koszul_mf([zero] * n, b, W=W)


def lift_potential(W: MultiPoly, ring: VarSet, copy: int) -> MultiPoly:
    n = W.varset.n
    return W.embed(ring, [ring.index(copy, i) for i in range(n)])


def diagonal_kernel(W: MultiPoly) -> MatrixFactorization:
    """Δ_W: a_j = ∇_j W (tail convention), b_j = y_j - x_j."""
    vs = W.varset
    if vs.copies != 1:
        raise ValueError("diagonal_kernel takes a potential in one copy of the variables")
    n = vs.n
    ring = vs.with_copies(2)
    a = [diff_quotient(W, j, source=0, target=1, convention="tail") for j in range(n)]
    b = [MultiPoly.variable(ring, W.m, j, copy=1) - MultiPoly.variable(ring, W.m, j, copy=0) for j in range(n)]
    mf = koszul_mf(a, b, W=W)
    expected = lift_potential(W, ring, 1) - lift_potential(W, ring, 0)
    if mf.potential != expected:
        raise MatrixFactorizationError("Σ a_j b_j does not telescope to W(y) - W(x)")
    return mf


# ---------------------------------------------------------------------------
# Equivariance
# ---------------------------------------------------------------------------

def rho(h: GroupElement, n: int) -> list[CycNum]:
    """ρ_S(h) = ∏_{i∈S} h_i for every subset S, in basis order."""
    return [h.scale_of([k >> i & 1 for i in range(n)]) for k in range(1 << n)]


def check_invariant(W: MultiPoly, group: DiagonalGroup) -> None:
    for g in group.generators:
        if act(g, W) != W:
            raise InvarianceError(f"potential is not invariant under generator {group.key(g)}")


def equivariance_failures(diff: np.ndarray, h: GroupElement, n: int) -> list[tuple[int, int]]:
    """Entries violating h·d[T,S]·ρ_T(h) = ρ_S(h)·d[T,S]."""
    weights = rho(h, n)
    bad = []
    for t, s in zip(*np.nonzero(np.vectorize(lambda p: not p.is_zero(), otypes=[bool])(diff))):
        entry = diff[t, s]
        if act(h, entry).scale(weights[t]) != entry.scale(weights[s]):
            bad.append((int(t), int(s)))
    return bad


@dataclass(frozen=True, eq=False)
class EquivariantMF:
    base: MatrixFactorization
    group: DiagonalGroup

    def rho(self, h: GroupElement) -> list[CycNum]:
        return rho(h, self.base.n)

    def check(self) -> dict:
        failures = []
        for h in self.group.generators:
            for t, s in equivariance_failures(self.base.diff, h, self.base.n):
                failures.append({"generator": self.group.key(h), "row": t, "col": s})
        return {"ok": not failures, "failures": failures}


def average_wedge(a: MultiPoly, j: int, group: DiagonalGroup) -> MultiPoly:
    """avg_g g_j·(g·a) so that h·ā = h_j^{-1}·ā."""
    total = MultiPoly.zero(a.varset, a.m)
    for g in group:
        total = total + act(g, a).scale(g.entry(j))
    return total.scale(QQ(1, len(group)))


def equivariant_modify(mf: MatrixFactorization, group: DiagonalGroup) -> EquivariantMF:
    """Average s₁ over H, θ_i acted on like x_i; s₀ is kept."""
    if mf.W is None or not mf.a:
        raise ValueError("equivariant_modify expects a diagonal kernel")
    check_invariant(mf.W, group)
    a = [average_wedge(aj, j, group) for j, aj in enumerate(mf.a)]
    modified = koszul_mf(a, mf.b, W=mf.W)
    emf = EquivariantMF(modified, group)
    report = emf.check()
    if not report["ok"]:
        raise MatrixFactorizationError(f"averaged kernel is not equivariant: {report['failures'][:3]}")
    return emf


@dataclass(frozen=True, eq=False)
class KernelStack:
    """⊕_h (R^e[θ], d(h·x, y)) with the H×H action."""

    equivariant: EquivariantMF
    summands: dict[GroupElement, MatrixFactorization] = field(default_factory=dict)

    @property
    def group(self) -> DiagonalGroup:
        return self.equivariant.group

    @staticmethod
    def target(h1: GroupElement, h2: GroupElement, h: GroupElement) -> GroupElement:
        """(h1, h2) sends summand h to summand h1·h·h2⁻¹."""
        return h1 * h * h2.inverse()

    def transport(self, diff: np.ndarray, h1: GroupElement, h2: GroupElement) -> np.ndarray:
        """d[T,S](h1·x, h2·y)·ρ_T(h2)·ρ_S(h2)⁻¹, entrywise."""
        n, ring = self.equivariant.base.n, self.equivariant.base.ring
        weights = rho(h2, n)
        images = [along(h1, 0), along(h2, 1)]
        out = np.empty(diff.shape, dtype=object)
        for t in range(diff.shape[0]):
            for s in range(diff.shape[1]):
                out[t, s] = restrict_copy(diff[t, s], images, ring).scale(weights[t] * weights[s].inverse())
        return out

    def action_failures(self, h1: GroupElement, h2: GroupElement, h: GroupElement) -> list[tuple[int, int]]:
        """Check d_h[T,S](h1·x, h2·y)·ρ_T(h2) = ρ_S(h2)·d_{h1hh2⁻¹}[T,S](x, y)."""
        moved = self.transport(self.summands[h].diff, h1, h2)
        dst = self.summands[self.target(h1, h2, h)].diff
        return [(t, s) for t in range(dst.shape[0]) for s in range(dst.shape[1]) if moved[t, s] != dst[t, s]]

    def composition_failures(self) -> list[dict]:
        """Acting by (h1,h2) then (k1,k2) must equal acting by (h1k1, h2k2), for H×H generators."""
        one = self.group.identity
        gens = [(g, one) for g in self.group.generators] + [(one, g) for g in self.group.generators]
        failures = []
        for h, summand in self.summands.items():
            for h1, h2 in gens:
                once = self.transport(summand.diff, h1, h2)
                for k1, k2 in gens:
                    twice = self.transport(once, k1, k2)
                    direct = self.transport(summand.diff, h1 * k1, h2 * k2)
                    if not all(a == b for a, b in zip(twice.flat, direct.flat)):
                        failures.append({
                            "summand": self.group.key(h),
                            "first": [self.group.key(h1), self.group.key(h2)],
                            "second": [self.group.key(k1), self.group.key(k2)],
                        })
        return failures

    def composition_ok(self) -> bool:
        return not self.composition_failures()

    def check(self) -> list[dict]:
        out = []
        for h, summand in self.summands.items():
            bad, _ = residual(summand.square(), summand.potential)
            eq_failures = []
            for h1 in self.group:
                for h2 in self.group:
                    if self.action_failures(h1, h2, h):
                        eq_failures.append([self.group.key(h1), self.group.key(h2)])
            logger.debug("summand %s: %d square failures, %d action failures",
                         self.group.key(h), len(bad), len(eq_failures))
            out.append({
                "summand": self.group.key(h),
                "squares_ok": not bad,
                "equivariance_ok": not eq_failures,
                "failures": eq_failures,
            })
        return out


def build_kernel_stack(emf: EquivariantMF, group: DiagonalGroup | None = None) -> KernelStack:
    group = group or emf.group
    base = emf.base
    n, ring = base.n, base.ring
    summands = {}
    for h in group:
        images = [along(h, 0), identity_block(n, 1)]
        diff = np.vectorize(lambda p: restrict_copy(p, images, ring), otypes=[object])(base.diff)
        summands[h] = MatrixFactorization(n, ring, base.m, diff, base.potential, W=base.W)
    return KernelStack(EquivariantMF(base, group), summands)


# ---------------------------------------------------------------------------
# Sector complexes
# ---------------------------------------------------------------------------

def sector_generator_sign(chi: GroupElement) -> int:
    """(-1)^{|I_χ|}: the top-degree sector generator is ∏_{i∈I_χ}(-∂θ_i)."""
    return -1 if chi.d % 2 else 1


@dataclass(frozen=True, eq=False)
class SectorComplex:
    """δ_Kos(χ) = Σ(x_i - χx_i)·∂θ_i and δ_curv(χ) = -Σ ∇_iW|_{y=χx}·θ_i on R[∂θ]."""

    chi: GroupElement
    W: MultiPoly
    kos: np.ndarray
    curv: np.ndarray

    def check(self) -> dict:
        zero = MultiPoly.zero(self.W.varset, self.W.m)
        res = {}
        for name, square in (
            ("kos_square", self.kos @ self.kos),
            ("curv_square", self.curv @ self.curv),
            ("anticommutator", self.kos @ self.curv + self.curv @ self.kos),
        ):
            bad, _ = residual(square, zero)
            res[name] = not bad
        total = self.kos + self.curv
        bad, _ = residual(total @ total, zero)
        res["total_square"] = not bad
        res["ok"] = all(res.values())
        return res


def sector_complex(mf: MatrixFactorization | MultiPoly, chi: GroupElement) -> SectorComplex:
    W = mf if isinstance(mf, MultiPoly) else mf.W
    if W is None:
        raise ValueError("sector_complex needs the potential of a diagonal kernel")
    if act(chi, W) != W:
        raise InvarianceError(f"potential is not invariant under {chi}")
    vs, m = W.varset, W.m
    n = vs.n
    kos = zero_matrix(1 << n, vs, m)
    curv = zero_matrix(1 << n, vs, m)
    images = [identity_block(n), along(chi)]
    for i in range(n):
        x = MultiPoly.variable(vs, m, i)
        _accumulate(kos, wedge_matrix(n, i), x - x.scale(chi.entry(i)))
        nabla = diff_quotient(W, i, source=0, target=1, convention="head")
        _accumulate(curv, contraction_matrix(n, i), -restrict_copy(nabla, images, vs))
    return SectorComplex(chi, W, kos, curv)


# ---------------------------------------------------------------------------
# 8×8 template
# ---------------------------------------------------------------------------

MFABC_BASIS = ("p", "X1", "X2", "X3", "e", "Xbar1", "Xbar2", "Xbar3")


def mfabc_matrix(d: Sequence[MultiPoly], f: Sequence[MultiPoly], c: Sequence[MultiPoly]) -> np.ndarray:
    """[[0, B], [C, 0]] on (p, X1, X2, X3 | e, X̄1, X̄2, X̄3); c = (c12, c13, c23)."""
    d1, d2, d3 = d
    f1, f2, f3 = f
    c12, c13, c23 = c
    zero = MultiPoly.zero(d1.varset, d1.m)
    B = [[zero, d1, d2, d3], [d1, zero, c12, c13], [d2, -c12, zero, c23], [d3, -c13, -c23, zero]]
    C = [[zero, f1, f2, f3], [f1, zero, d3, -d2], [f2, -d3, zero, d1], [f3, d2, -d1, zero]]
    M = np.full((8, 8), zero, dtype=object)
    for r in range(4):
        for s in range(4):
            M[r, 4 + s] = B[r][s]
            M[4 + r, s] = C[r][s]
    return M


def default_c(f: Sequence[MultiPoly], c_sign: int) -> tuple[MultiPoly, MultiPoly, MultiPoly]:
    """c12 = s·f3, c13 = -s·f2, c23 = s·f1."""
    f1, f2, f3 = f
    return f3.scale(c_sign), f2.scale(-c_sign), f1.scale(c_sign)


def mfabc_check(W: MultiPoly, f: Sequence[MultiPoly], c: Sequence[MultiPoly] | None = None,
                c_sign: int = -1, *, _alternative: bool = True) -> dict:
    vs = W.varset
    if vs.n != 3 or len(f) != 3:
        raise ValueError("the 8×8 template is for three variables")
    ring = vs.with_copies(2)
    m = W.m
    d = [MultiPoly.variable(ring, m, i, copy=1) - MultiPoly.variable(ring, m, i, copy=0) for i in range(3)]
    target = lift_potential(W, ring, 1) - lift_potential(W, ring, 0)

    telescoped = d[0] * f[0] + d[1] * f[1] + d[2] * f[2]
    pre_residual = telescoped - target
    c = tuple(c) if c is not None else default_c(f, c_sign)
    c12, c13, c23 = c
    relations = [c12 * f[1] + c13 * f[2], -(c12 * f[0]) + c23 * f[2], -(c13 * f[0]) - c23 * f[1]]
    relations_ok = all(r.is_zero() for r in relations)

    M = mfabc_matrix(d, f, c)
    bad, eff = residual(M @ M, target)
    report = {
        "ok": pre_residual.is_zero() and not bad and relations_ok,
        "precondition_ok": pre_residual.is_zero(),
        "precondition_residual": pre_residual.to_json(),
        "squares_ok": not bad,
        "residual": _entries_json(bad[:4]),
        "relations_ok": relations_ok,
        "c_sign": c_sign,
        "precision": None if eff == INF else int(eff),
    }
    if _alternative:
        alt = mfabc_check(W, f, None, -c_sign, _alternative=False)
        report["alternative_ok"] = alt["squares_ok"]
    return report
