"""The elliptic curve example: W = -φi(x₁³+x₂³+x₃³) + ψi·x₁x₂x₃ with ℤ/3
acting by χ·x_j = χ̌x_j, and the Kodaira-Spencer map from H*(T²).

Coefficients live in ℚ(ζ₁₂): i = ζ₁₂³ and χ̌ = ζ₁₂⁴.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

from sympy.polys.domains import QQ

from .config import CONVENTIONS, DEFAULT_PRECISION, Conventions
from .mf import sector_generator_sign
from .orbjac import (
    TwistedElement,
    TwistedJacAlgebra,
    build_HW,
    build_HWg,
    check_algebra,
    evaluate_HW,
    invariant_part,
    twisted_algebra,
)
from .poly import DiagonalGroup, GroupElement, MultiPoly, VarSet, along, restrict_copy
from .scalar import INF, CycNum, QSeries

logger = logging.getLogger(__name__)

M = 12
SERIES_NAMES = ("phi", "psi", "gamma")
GAMMA_SIGNS = (1, -1)
ALGEBRA_SIGNS = ("m2", "dg")


def imaginary_unit(m: int = M) -> CycNum:
    if m % 4:
        raise ValueError(f"ℚ(ζ_{m}) does not contain i")
    return CycNum.root(m, m // 4)


def cube_root(m: int = M) -> CycNum:
    """χ̌ = e^{2πi/3}."""
    if m % 3:
        raise ValueError(f"ℚ(ζ_{m}) does not contain a cube root of unity")
    return CycNum.root(m, m // 3)


# ---------------------------------------------------------------------------
# q-series
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NamedSeries:
    name: str
    value: QSeries


def _alternating(k: int) -> int:
    """(-1)^{k+1}"""
    return -1 if (k + 1) % 2 else 1


def series(name: str, N: int = DEFAULT_PRECISION, m: int = M, gamma_sign: int = 1) -> QSeries:
    """φ = Σ(-1)^{k+1}(k+½)q^{(6k+3)²}, ψ = Σ(-1)^{k+1}(6k+1)q^{(6k+1)²},
    γ = ±Σ(-1)^{k+1}i·q^{(6k+1)²}, all O(q^N)."""
    if name not in SERIES_NAMES:
        raise ValueError(f"unknown series {name!r}; expected one of {SERIES_NAMES}")
    if N < 1:
        raise ValueError("precision must be at least 1")
    if gamma_sign not in GAMMA_SIGNS:
        raise ValueError("gamma_sign must be 1 or -1")
    bound = math.isqrt(N) // 6 + 2
    terms: dict[int, CycNum] = {}
    unit = imaginary_unit(m) if name == "gamma" else CycNum.one(m)
    for k in range(-bound, bound + 1):
        if name == "phi":
            base, weight = 6 * k + 3, QQ(2 * k + 1, 2)
        elif name == "psi":
            base, weight = 6 * k + 1, QQ(6 * k + 1)
        else:
            base, weight = 6 * k + 1, QQ(gamma_sign)
        e = base * base
        if e >= N:
            continue
        c = unit * (weight * _alternating(k))
        terms[e] = terms[e] + c if e in terms else c
    return QSeries(m, terms, N)


def named_series(name: str, N: int = DEFAULT_PRECISION, **kwargs) -> NamedSeries:
    return NamedSeries(name, series(name, N, **kwargs))


def modular_identity_check(N: int = DEFAULT_PRECISION, *, gamma: QSeries | None = None,
                           gamma_sign: int = 1) -> dict:
    """γ²·q(-ψφ' + φψ') = -8φ(27φ³ - ψ³), coefficient by coefficient."""
    if N < 13:
        raise ValueError("the identity starts at q^12; use N >= 13")
    phi, psi = series("phi", N), series("psi", N)
    if gamma is None:
        gamma = series("gamma", N, gamma_sign=gamma_sign)
    lhs = gamma * gamma * (-(psi * phi.q_d_dq()) + phi * psi.q_d_dq())
    rhs = (phi * (phi ** 3 * 27 - psi ** 3)) * -8
    ok, eff, first = lhs.compare(rhs)
    report = {
        "ok": ok,
        "precision": None if eff == INF else int(eff),
        "first_failure": first,
        "leading_lhs": _leading(lhs),
        "leading_rhs": _leading(rhs),
    }
    if first is not None:
        report["lhs_coefficient"] = lhs.coefficient(first).to_json()
        report["rhs_coefficient"] = rhs.coefficient(first).to_json()
    return report


def _leading(s: QSeries) -> dict | None:
    v = s.valuation
    if v is None:
        return None
    return {"exp": v, "cyc": s.leading().to_json()}


def cyclotomic_identity_check(m: int = M) -> dict:
    """(1+χ̌)(1-χ̌)² = 3, i.e. (1+χ̌)/(3(1-χ̌)) = (1-χ̌)⁻³."""
    w = cube_root(m)
    value = (1 + w) * (1 - w) ** 2
    return {"ok": value == 3, "value": value.to_json()}


# ---------------------------------------------------------------------------
# The potential
# ---------------------------------------------------------------------------

def t2_group(m: int = M) -> DiagonalGroup:
    k = m // 3
    return DiagonalGroup.generate([GroupElement(m, (k, k, k))])


def chi(group: DiagonalGroup) -> GroupElement:
    return group.generators[0]


def build_W_t2(N: int = DEFAULT_PRECISION, m: int = M) -> MultiPoly:
    if N < 26:
        raise ValueError("use N >= 26 so that ψ keeps two terms")
    i = imaginary_unit(m)
    phi, psi = series("phi", N, m), series("psi", N, m)
    vs = VarSet.standard(3)
    terms = {}
    for j in range(3):
        exps = [0, 0, 0]
        exps[j] = 3
        terms[tuple(exps)] = -(phi * i)
    terms[(1, 1, 1)] = psi * i
    return MultiPoly(vs, m, terms)


def t2_algebra(N: int = DEFAULT_PRECISION, conventions: Conventions = CONVENTIONS) -> TwistedJacAlgebra:
    started = time.monotonic()
    alg = twisted_algebra(build_W_t2(N), t2_group(), conventions=conventions)
    logger.debug("T² twisted algebra at N=%d built in %.2fs", N, time.monotonic() - started)
    return alg


def sigma_closed_form(alg: TwistedJacAlgebra) -> MultiPoly:
    """(27φ³ - ψ³)i/(1-χ̌)³·x₁x₂x₃ reduced in Jac(W)."""
    N = int(alg.W.precision())
    phi, psi = series("phi", N, alg.m), series("psi", N, alg.m)
    w = cube_root(alg.m)
    coeff = (phi ** 3 * 27 - psi ** 3) * (imaginary_unit(alg.m) * ((1 - w) ** 3).inverse())
    one = alg.group.identity
    return alg.sectors[one].jac.normal_form(MultiPoly.monomial(alg.varset, alg.m, (1, 1, 1), coeff))


def sigma_explicit(alg: TwistedJacAlgebra) -> MultiPoly:
    """A₁₁A₂₂A₃₃ - A₂₂B₁₃C₁₃ - A₃₃B₁₂C₁₂ + A₃₂B₁₂C₁₃ from the coefficients of
    H_W(x,χx,x), H_{W,χ}(x) and H_{W,χ²}(χx)."""
    g = chi(alg.group)
    g2 = g * g
    vs = alg.varset
    hw = evaluate_HW(build_HW(alg.W), g, vs)
    hwg = build_HWg(alg.W, g, alg.conventions)
    hwg2 = build_HWg(alg.W, g2, alg.conventions).map_coefficients(lambda c: restrict_copy(c, [along(g)], vs))
    zero = MultiPoly.zero(vs, alg.m)

    def A(i, j):
        return hw.terms.get(((i - 1,), (j - 1,)), zero)

    def B(i, j):
        return hwg.terms.get((i - 1, j - 1), zero)

    def C(i, j):
        return hwg2.terms.get((i - 1, j - 1), zero)

    total = (A(1, 1) * A(2, 2) * A(3, 3) - A(2, 2) * B(1, 3) * C(1, 3)
             - A(3, 3) * B(1, 2) * C(1, 2) + A(3, 2) * B(1, 2) * C(1, 3))
    return alg.sectors[alg.group.identity].jac.normal_form(total)


# ---------------------------------------------------------------------------
# H*(T²)
# ---------------------------------------------------------------------------

T2_BASIS = ("1", "C_h", "C_v", "pt")
T2_DEGREES = {"1": 0, "C_h": 1, "C_v": 1, "pt": 2}

# g·C_h = C_v, g·C_v = -C_h - C_v
T2_ACTION = {"1": {"1": 1}, "C_h": {"C_v": 1}, "C_v": {"C_h": -1, "C_v": -1}, "pt": {"pt": 1}}

_CUP = {
    ("1", "1"): ("1", 1), ("1", "C_h"): ("C_h", 1), ("1", "C_v"): ("C_v", 1), ("1", "pt"): ("pt", 1),
    ("C_h", "1"): ("C_h", 1), ("C_v", "1"): ("C_v", 1), ("pt", "1"): ("pt", 1),
    ("C_h", "C_v"): ("pt", 1), ("C_v", "C_h"): ("pt", -1),
}


@dataclass(frozen=True, eq=False)
class T2Class:
    m: int
    coeffs: Mapping[str, QSeries] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self) -> None:
        clean = {}
        for k, c in self.coeffs.items():
            if k not in T2_BASIS:
                raise ValueError(f"unknown class {k!r}")
            if not isinstance(c, QSeries):
                c = QSeries.constant(self.m, c)
            if not c.is_zero():
                clean[k] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def basis(cls, name: str, m: int = M) -> "T2Class":
        return cls(m, {name: 1})

    def __add__(self, other: "T2Class") -> "T2Class":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return T2Class(self.m, out)

    def __neg__(self) -> "T2Class":
        return T2Class(self.m, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "T2Class") -> "T2Class":
        return self + (-other)

    def scale(self, c) -> "T2Class":
        return T2Class(self.m, {k: a * c for k, a in self.coeffs.items()})

    def compare(self, other: "T2Class") -> tuple[bool, float]:
        zero = QSeries.zero(self.m)
        ok, eff = True, INF
        for k in T2_BASIS:
            same, p, _ = self.coeffs.get(k, zero).compare(other.coeffs.get(k, zero))
            ok, eff = ok and same, min(eff, p)
        return ok, eff

    def __eq__(self, other) -> bool:
        if not isinstance(other, T2Class):
            return NotImplemented
        return self.compare(other)[0]

    def __str__(self) -> str:
        return " + ".join(f"({c})*{k}" for k, c in self.coeffs.items()) or "0"


def t2_cup(a: T2Class, b: T2Class) -> T2Class:
    """Cup product with C_h ∪ C_v = +pt."""
    out = T2Class(a.m)
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            hit = _CUP.get((ka, kb))
            if hit is None:
                continue
            name, sign = hit
            out = out + T2Class(a.m, {name: ca * cb * sign})
    return out


def t2_act(a: T2Class) -> T2Class:
    out = T2Class(a.m)
    for k, c in a.coeffs.items():
        out = out + T2Class(a.m, {t: c * s for t, s in T2_ACTION[k].items()})
    return out


@dataclass(frozen=True, eq=False)
class T2Cohomology:
    m: int = M
    gamma: QSeries | None = None

    def element(self, name: str) -> T2Class:
        return T2Class.basis(name, self.m)

    def degree(self, name: str) -> int:
        return T2_DEGREES[name]

    def alpha(self) -> QSeries:
        """Prefactor of the eigenclasses: sign(χ)·iγ/(χ̌-1)."""
        sign = sector_generator_sign(GroupElement(self.m, (self.m // 3,) * 3))
        w = cube_root(self.m)
        return self.gamma * (imaginary_unit(self.m) * (w - 1).inverse() * sign)

    def l_chi(self) -> T2Class:
        """-iγ(C_h - χ̌C_v)/(χ̌-1), eigenvalue χ̌."""
        w = cube_root(self.m)
        return (self.element("C_h") - self.element("C_v").scale(w)).scale(self.alpha())

    def l_chi2(self) -> T2Class:
        """-iγ(C_v - χ̌C_h)/(χ̌-1), eigenvalue χ̌²."""
        w = cube_root(self.m)
        return (self.element("C_v") - self.element("C_h").scale(w)).scale(self.alpha())

    def cup_table(self) -> dict[tuple[str, str], T2Class]:
        return {(a, b): t2_cup(self.element(a), self.element(b)) for a in T2_BASIS for b in T2_BASIS}


# ---------------------------------------------------------------------------
# Kodaira-Spencer map
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KSAssignment:
    algebra: TwistedJacAlgebra
    cohomology: T2Cohomology
    images: Mapping[str, TwistedElement]

    def __call__(self, a: T2Class) -> TwistedElement:
        out = TwistedElement()
        for k, c in a.coeffs.items():
            out = out + self.images[k].scale(c)
        return out


def ks_point(alg: TwistedJacAlgebra) -> MultiPoly:
    """(1/24)·q∂_qW reduced in Jac(W)."""
    qdW = alg.W.map_coefficients(lambda c: c.q_d_dq()).scale(QQ(1, 24))
    return alg.sectors[alg.group.identity].jac.normal_form(qdW)


def ks_assignment(N: int = DEFAULT_PRECISION, algebra: TwistedJacAlgebra | None = None,
                  gamma_sign: int = 1) -> KSAssignment:
    """1 ↦ ξ₁, pt ↦ (1/24)q∂_qW·ξ₁, l_χ ↦ ξ_χ, l_{χ²} ↦ ξ_{χ²}; C_h, C_v by linearity."""
    alg = algebra or t2_algebra(N)
    N = int(alg.W.precision())
    m = alg.m
    coh = T2Cohomology(m, series("gamma", N, m, gamma_sign=gamma_sign))
    g = chi(alg.group)
    one = alg.group.identity
    xi = alg.element(g)
    xi2 = alg.element(g * g)
    w = cube_root(m)
    # C_h = (l_χ + χ̌l_{χ²})/(α(1-χ̌²)), C_v = (l_{χ²} + χ̌l_χ)/(α(1-χ̌²))
    denom = (coh.alpha() * (1 - w * w)).invert()
    images = {
        "1": alg.unit(),
        "pt": alg.element(one, ks_point(alg)),
        "l_chi": xi,
        "l_chi2": xi2,
        "C_h": (xi + xi2.scale(w)).scale(denom),
        "C_v": (xi2 + xi.scale(w)).scale(denom),
    }
    return KSAssignment(alg, coh, images)


def _parity(x: TwistedElement) -> int:
    parities = {h.parity for h in x.components}
    return parities.pop() if len(parities) == 1 else 0


def verify_ring_hom(N: int = DEFAULT_PRECISION, algebra_sign: str = "m2",
                    ks: KSAssignment | None = None) -> dict:
    """ks(a∪b) against ks(a)•ks(b) over the basis of H*(T²) and the eigenclasses."""
    if algebra_sign not in ALGEBRA_SIGNS:
        raise ValueError(f"algebra_sign must be one of {ALGEBRA_SIGNS}")
    ks = ks or ks_assignment(N)
    alg, coh = ks.algebra, ks.cohomology
    named = {k: coh.element(k) for k in T2_BASIS}
    named["l_chi"] = coh.l_chi()
    named["l_chi2"] = coh.l_chi2()

    pairs = []
    eff = INF
    for a in ("1", "C_h", "C_v", "pt", "l_chi", "l_chi2"):
        for b in ("1", "C_h", "C_v", "pt", "l_chi", "l_chi2"):
            ka, kb = ks(named[a]), ks(named[b])
            lhs = ks(t2_cup(named[a], named[b]))
            rhs = alg.product(ka, kb)
            if algebra_sign == "dg" and _parity(ka):
                rhs = -rhs
            ok, p = lhs.compare(rhs)
            eff = min(eff, p)
            pairs.append({"a": a, "b": b, "ok": ok})
    failures = [p for p in pairs if not p["ok"]]
    eigen = {
        "l_chi": t2_act(named["l_chi"]) == named["l_chi"].scale(cube_root(alg.m)),
        "l_chi2": t2_act(named["l_chi2"]) == named["l_chi2"].scale(cube_root(alg.m) ** 2),
    }
    return {
        "ok": not failures and all(eigen.values()),
        "algebra_sign": algebra_sign,
        "precision": None if eff == INF else int(eff),
        "pairs": pairs,
        "failures": failures,
        "eigenvectors": eigen,
    }


# ---------------------------------------------------------------------------
# Whole pipeline
# ---------------------------------------------------------------------------

def _check(name: str, ok: bool, **extra) -> dict:
    return {"name": name, "ok": bool(ok), **extra}


def run_report(N: int = DEFAULT_PRECISION, conventions: Conventions = CONVENTIONS) -> dict:
    """Every identity of the example, with status and effective precision."""
    checks = []
    m = M
    i = imaginary_unit(m)
    golden = {
        "phi": QSeries(m, {9: -1, 81: 3}, 100),
        "psi": QSeries(m, {1: -1, 25: -5, 49: 7}, 50),
        "gamma": QSeries(m, {1: -i, 25: i, 49: i}, 50),
    }
    for name, expected in golden.items():
        got = series(name, int(expected.prec), m)
        checks.append(_check(f"series_{name}", got == expected, value=got.to_json()))

    checks.append(_check("modular_identity", **modular_identity_check(N)))
    checks.append(_check("cyclotomic_identity", **cyclotomic_identity_check(m)))

    alg = t2_algebra(N, conventions)
    g = chi(alg.group)
    one = alg.group.identity
    dims = {alg.key(h): len(alg.sectors[h].jac.basis) for h in alg.group}
    checks.append(_check("milnor_numbers", dims == {alg.key(one): 8, alg.key(g): 1, alg.key(g * g): 1}, dims=dims))

    orb = invariant_part(alg)
    parities = sorted(b.h.parity for b in orb.basis)
    checks.append(_check("orbifold_dimension", len(orb.basis) == 4 and parities == [0, 0, 1, 1],
                         dimension=len(orb.basis), parities=parities))

    s_1chi = alg.sigma(one, g)
    checks.append(_check("sigma_1_chi", s_1chi == 1, value=s_1chi.to_json()))
    for h in (g, g * g):
        s = alg.sigma(h, h)
        checks.append(_check(f"sigma_{alg.key(h)}_{alg.key(h)}", s.is_zero(), value=s.to_json()))
    s = alg.sigma(g, g * g)
    closed = sigma_closed_form(alg)
    explicit = sigma_explicit(alg)
    ok, eff = s.compare(closed)
    checks.append(_check("sigma_chi_chi2_closed_form", ok, precision=None if eff == INF else int(eff),
                         value=s.to_json()))
    checks.append(_check("sigma_chi_chi2_explicit", s == explicit))
    checks.append(_check("sigma_antisymmetry", alg.sigma(g * g, g) == -s))

    checks.append(_check("algebra_axioms", **check_algebra(orb)))
    checks.append(_check("ring_homomorphism", **verify_ring_hom(N, ks=ks_assignment(N, alg))))

    failures = [c["name"] for c in checks if not c["ok"]]
    return {"ok": not failures, "precision": N, "gamma_convention": "(-1)^(k+1)",
            "checks": checks, "failures": failures}
