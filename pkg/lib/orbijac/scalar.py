"""Exact scalars: cyclotomic numbers and truncated Laurent series in q.

CycNum is an element of Q(ζ_m) stored in the power basis ζ^0 .. ζ^(φ(m)-1),
always reduced modulo the m-th cyclotomic polynomial, so equality is plain
tuple equality.

QSeries is a Laurent series in q with CycNum coefficients known below a
precision N; constants carry an infinite precision.
"""

from __future__ import annotations

import logging
import math
import operator
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Union

from sympy import cyclotomic_poly, totient
from sympy.polys.densearith import dup_rem
from sympy.polys.densebasic import dup_strip
from sympy.polys.domains import QQ
from sympy.polys.euclidtools import dup_invert
from sympy.polys.polyerrors import NotInvertible

from .config import DEFAULT_PRECISION
from .errors import NotInvertibleError, PrecisionError

logger = logging.getLogger(__name__)

INF = math.inf

Rational = type(QQ(0))


def to_rational(value) -> Rational:
    """Coerce an int, QQ element or "a/b" string to QQ."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, str):
        num, _, den = value.strip().partition("/")
        return QQ(int(num), int(den) if den else 1)
    raise TypeError(f"cannot read {value!r} as a rational")


# ---------------------------------------------------------------------------
# Q(ζ_m) tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _degree(m: int) -> int:
    return int(totient(m))


@lru_cache(maxsize=None)
def _modulus(m: int) -> list:
    """Φ_m as a dense QQ list, highest degree first."""
    poly = cyclotomic_poly(m, polys=True)
    return [QQ(int(c)) for c in poly.all_coeffs()]


def _reduce_dense(low_first: list, m: int) -> tuple:
    deg = _degree(m)
    high = dup_strip(list(reversed(low_first)))
    rem = dup_rem(high, _modulus(m), QQ) if len(high) > deg else high
    out = list(reversed(rem))
    out.extend([QQ(0)] * (deg - len(out)))
    return tuple(out)


@lru_cache(maxsize=None)
def _reduction_table(m: int) -> tuple:
    """Reduced vectors of ζ^k for φ(m) <= k <= 2φ(m)-2."""
    deg = _degree(m)
    rows = []
    for k in range(deg, 2 * deg - 1):
        rows.append(_reduce_dense([QQ(0)] * k + [QQ(1)], m))
    return tuple(rows)


@lru_cache(maxsize=None)
def _root_vector(m: int, k: int) -> tuple:
    return _reduce_dense([QQ(0)] * (k % m) + [QQ(1)], m)


# ---------------------------------------------------------------------------
# CycNum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycNum:
    m: int
    coeffs: tuple

    @classmethod
    def from_rational(cls, m: int, value) -> "CycNum":
        deg = _degree(m)
        return cls(m, (to_rational(value),) + (QQ(0),) * (deg - 1))

    @classmethod
    def zero(cls, m: int) -> "CycNum":
        return cls.from_rational(m, 0)

    @classmethod
    def one(cls, m: int) -> "CycNum":
        return cls.from_rational(m, 1)

    @classmethod
    def root(cls, m: int, k: int) -> "CycNum":
        """ζ_m^k."""
        return cls(m, _root_vector(m, k % m))

    @classmethod
    def from_vector(cls, m: int, values) -> "CycNum":
        """Power-basis coordinates of any length; reduced on the way in."""
        return cls(m, _reduce_dense([to_rational(v) for v in values], m))

    def __hash__(self) -> int:
        return hash((self.m, self.coeffs))

    def _coerce(self, other) -> "CycNum":
        if isinstance(other, CycNum):
            if other.m != self.m:
                raise ValueError(f"mixed cyclotomic orders {self.m} and {other.m}")
            return other
        return CycNum.from_rational(self.m, other)

    def __eq__(self, other) -> bool:
        if isinstance(other, CycNum):
            return self.m == other.m and self.coeffs == other.coeffs
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return self.coeffs == CycNum.from_rational(self.m, other).coeffs
        return NotImplemented

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational(self) -> Rational:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def __add__(self, other) -> "CycNum":
        if not isinstance(other, (CycNum, int, Rational)):
            return NotImplemented
        other = self._coerce(other)
        return CycNum(self.m, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "CycNum":
        return CycNum(self.m, tuple(-a for a in self.coeffs))

    def __sub__(self, other) -> "CycNum":
        if not isinstance(other, (CycNum, int, Rational)):
            return NotImplemented
        other = self._coerce(other)
        return CycNum(self.m, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other) -> "CycNum":
        return self._coerce(other) - self

    def __mul__(self, other) -> "CycNum":
        if isinstance(other, CycNum):
            if other.m != self.m:
                raise ValueError(f"mixed cyclotomic orders {self.m} and {other.m}")
        elif isinstance(other, (int, Rational)) and not isinstance(other, bool):
            r = to_rational(other)
            return CycNum(self.m, tuple(a * r for a in self.coeffs))
        else:
            return NotImplemented
        if self.is_rational():
            r = self.coeffs[0]
            return CycNum(self.m, tuple(r * b for b in other.coeffs))
        if other.is_rational():
            r = other.coeffs[0]
            return CycNum(self.m, tuple(a * r for a in self.coeffs))
        deg = _degree(self.m)
        conv = [QQ(0)] * (2 * deg - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    conv[i + j] += a * b
        out = conv[:deg]
        for k, row in enumerate(_reduction_table(self.m)):
            c = conv[deg + k]
            if c:
                for t in range(deg):
                    if row[t]:
                        out[t] += c * row[t]
        return CycNum(self.m, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "CycNum":
        if self.is_zero():
            raise NotInvertibleError("division by zero in Q(ζ_%d)" % self.m)
        if self.is_rational():
            return CycNum.from_rational(self.m, QQ(1) / self.coeffs[0])
        high = dup_strip(list(reversed(self.coeffs)))
        try:
            inv = dup_invert(high, _modulus(self.m), QQ)
        except NotInvertible as e:  # pragma: no cover - Φ_m is irreducible
            raise NotInvertibleError(str(e)) from e
        return CycNum(self.m, _reduce_dense(list(reversed(inv)), self.m))

    def __truediv__(self, other) -> "CycNum":
        if not isinstance(other, (CycNum, int, Rational)):
            return NotImplemented
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "CycNum":
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "CycNum":
        if k < 0:
            return self.inverse() ** (-k)
        result = CycNum.one(self.m)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, m: int, values: list[str]) -> "CycNum":
        return cls.from_vector(m, values)

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(f"z^{k}")
            else:
                parts.append(f"({c})*z^{k}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


_CYC_OPS = {"add": operator.add, "sub": operator.sub, "mul": operator.mul, "div": operator.truediv}


def cyc_arith(a: CycNum, b: CycNum, op: str) -> CycNum:
    try:
        fn = _CYC_OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    return fn(a, b)


# ---------------------------------------------------------------------------
# QSeries
# ---------------------------------------------------------------------------

Coefficient = Union[int, Rational, CycNum]


@dataclass(frozen=True, eq=False)
class QSeries:
    """Σ c_n q^n + O(q^prec). Exponents at or above ``prec`` are unknown."""

    m: int
    coeffs: Mapping[int, CycNum] = field(default_factory=dict)
    prec: float = INF

    __hash__ = None  # equality is precision-aware

    def __post_init__(self) -> None:
        clean = {}
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if not isinstance(c, CycNum):
                c = CycNum.from_rational(self.m, c)
            if e < self.prec and not c.is_zero():
                clean[e] = c
        object.__setattr__(self, "coeffs", clean)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, m: int, prec: float = INF) -> "QSeries":
        return cls(m, {}, prec)

    @classmethod
    def one(cls, m: int) -> "QSeries":
        return cls(m, {0: CycNum.one(m)})

    @classmethod
    def constant(cls, m: int, value: Coefficient) -> "QSeries":
        return cls(m, {0: value})

    @classmethod
    def monomial(cls, m: int, value: Coefficient, exp: int, prec: float = INF) -> "QSeries":
        return cls(m, {exp: value}, prec)

    @classmethod
    def from_dict(cls, m: int, terms: Mapping[int, Coefficient], prec: float = INF) -> "QSeries":
        return cls(m, dict(terms), prec)

    # -- inspection ---------------------------------------------------------

    @property
    def valuation(self) -> int | None:
        return next(iter(self.coeffs), None)

    @property
    def is_exact(self) -> bool:
        return self.prec == INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return self.is_exact and all(e == 0 for e in self.coeffs)

    def relative_precision(self) -> float:
        """Number of known exponents from the valuation up to the precision."""
        v = self.valuation
        if v is None:
            return INF if self.is_exact else 0
        return self.prec - v

    def _floor(self) -> float:
        v = self.valuation
        return self.prec if v is None else v

    def coefficient(self, n: int) -> CycNum:
        if n >= self.prec:
            raise PrecisionError(f"coefficient of q^{n} requested but series is known only below q^{self.prec}")
        return self.coeffs.get(n, CycNum.zero(self.m))

    def leading(self) -> CycNum:
        v = self.valuation
        if v is None:
            raise NotInvertibleError("zero series has no leading coefficient")
        return self.coeffs[v]

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            if other.m != self.m:
                raise ValueError(f"mixed cyclotomic orders {self.m} and {other.m}")
            return other
        if isinstance(other, CycNum) or isinstance(other, (int, Rational)):
            return QSeries.constant(self.m, other)
        raise TypeError(f"cannot combine QSeries with {type(other).__name__}")

    def __add__(self, other) -> "QSeries":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        prec = min(self.prec, other.prec)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return QSeries(self.m, out, prec)

    __radd__ = __add__

    def __neg__(self) -> "QSeries":
        return QSeries(self.m, {e: -c for e, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other) -> "QSeries":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "QSeries":
        return self._coerce(other) - self

    def scale(self, c: Coefficient) -> "QSeries":
        if not isinstance(c, CycNum):
            c = CycNum.from_rational(self.m, c)
        if c.is_zero():
            return QSeries.zero(self.m)
        return QSeries(self.m, {e: a * c for e, a in self.coeffs.items()}, self.prec)

    def shift(self, k: int) -> "QSeries":
        """Multiply by q^k."""
        return QSeries(self.m, {e + k: c for e, c in self.coeffs.items()}, self.prec + k)

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, (CycNum, int, Rational)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        other = self._coerce(other)
        prec = min(self.prec + other._floor(), other.prec + self._floor())
        if len(other.coeffs) == 1 and other.is_exact:
            (e, c), = other.coeffs.items()
            return QSeries(self.m, {a + e: b * c for a, b in self.coeffs.items()}, prec)
        if len(self.coeffs) == 1 and self.is_exact:
            return other * self
        out: dict[int, CycNum] = {}
        right = list(other.coeffs.items())
        for ea, ca in self.coeffs.items():
            for eb, cb in right:
                e = ea + eb
                if e >= prec:
                    break
                term = ca * cb
                out[e] = out[e] + term if e in out else term
        return QSeries(self.m, out, prec)

    def __rmul__(self, other) -> "QSeries":
        return self.__mul__(other)

    def invert(self, precision: int | None = None) -> "QSeries":
        """Multiplicative inverse.

        An exact series with more than one term has an infinite inverse; it is
        truncated to ``precision`` significant exponents (default: config).
        """
        v = self.valuation
        if v is None:
            raise NotInvertibleError(f"series {self} is zero to precision {self.prec}")
        lead_inv = self.coeffs[v].inverse()
        if self.is_exact and len(self.coeffs) == 1:
            return QSeries.monomial(self.m, lead_inv, -v)
        rel = self.prec - v
        if rel == INF:
            rel = precision if precision is not None else DEFAULT_PRECISION
        elif precision is not None:
            rel = min(rel, precision)
        rel = int(rel)
        tail = [(e - v, c) for e, c in self.coeffs.items() if 0 < e - v < rel]
        b = [lead_inv]
        zero = CycNum.zero(self.m)
        for k in range(1, rel):
            acc = zero
            for j, aj in tail:
                if j > k:
                    break
                bk = b[k - j]
                if not bk.is_zero():
                    acc = acc + aj * bk
            b.append(-(lead_inv * acc) if not acc.is_zero() else zero)
        return QSeries(self.m, {k - v: c for k, c in enumerate(b)}, rel - v)

    def __truediv__(self, other) -> "QSeries":
        if isinstance(other, (CycNum, int, Rational)):
            if not isinstance(other, CycNum):
                other = CycNum.from_rational(self.m, other)
            return self.scale(other.inverse())
        return self * self._coerce(other).invert()

    def __rtruediv__(self, other) -> "QSeries":
        return self._coerce(other) * self.invert()

    def __pow__(self, k: int) -> "QSeries":
        if k < 0:
            return self.invert() ** (-k)
        result = QSeries.one(self.m)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def d_dq(self) -> "QSeries":
        return QSeries(self.m, {e - 1: c * e for e, c in self.coeffs.items() if e}, self.prec - 1)

    def q_d_dq(self) -> "QSeries":
        return QSeries(self.m, {e: c * e for e, c in self.coeffs.items() if e}, self.prec)

    def truncate(self, prec: float) -> "QSeries":
        return QSeries(self.m, self.coeffs, min(prec, self.prec))

    def evaluate(self, q) -> CycNum:
        """Specialize q to a rational value (exact fallback mode)."""
        q = to_rational(q)
        total = CycNum.zero(self.m)
        for e, c in self.coeffs.items():
            factor = q ** e if e >= 0 else (QQ(1) / q) ** (-e)
            total = total + c * factor
        return total

    # -- comparison ---------------------------------------------------------

    def compare(self, other) -> tuple[bool, float, int | None]:
        """(agree, effective precision, first differing exponent)."""
        other = self._coerce(other)
        eff = min(self.prec, other.prec)
        for e in sorted(set(self.coeffs) | set(other.coeffs)):
            if e >= eff:
                break
            if self.coeffs.get(e) != other.coeffs.get(e):
                return False, eff, e
        return True, eff, None

    def __eq__(self, other) -> bool:
        if isinstance(other, (QSeries, CycNum)) and other.m != self.m:
            return False
        try:
            return self.compare(other)[0]
        except TypeError:
            return NotImplemented

    # -- output -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "val": self.valuation,
            "terms": [{"exp": e, "cyc": c.to_json()} for e, c in self.coeffs.items()],
            "prec": None if self.is_exact else int(self.prec),
        }

    @classmethod
    def from_json(cls, m: int, data: dict) -> "QSeries":
        prec = INF if data.get("prec") is None else int(data["prec"])
        return cls(m, {t["exp"]: CycNum.from_json(m, t["cyc"]) for t in data["terms"]}, prec)

    def __str__(self) -> str:
        parts = []
        for e, c in self.coeffs.items():
            cs = str(c)
            if " + " in cs:
                cs = f"({cs})"
            parts.append(cs if e == 0 else f"{cs}*q^{e}")
        if not self.is_exact:
            parts.append(f"O(q^{int(self.prec)})")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def series_arith(a: QSeries, b: QSeries, op: str) -> QSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def series_invert(a: QSeries) -> QSeries:
    return a.invert()


def q_derivative(a: QSeries, mode: str = "d_dq") -> QSeries:
    if mode == "d_dq":
        return a.d_dq()
    if mode == "q_d_dq":
        return a.q_d_dq()
    raise ValueError(f"unknown mode {mode!r}")
