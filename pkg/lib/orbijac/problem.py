"""Problem files: a potential with a diagonal symmetry group, as JSON.

Scalar literals are an integer, a "a/b" string, or an object
``{"rational": r, "root": k, "cyc": [...], "series": name}`` meaning the
product r·ζ_m^k·(Σ cyc_j ζ_m^j)·series(q), every part optional.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

from jsonschema import Draft202012Validator

from .config import DEFAULT_PRECISION, GROUP_BOUND
from .errors import OrbijacError, ProblemError
from .mf import check_invariant
from .poly import DiagonalGroup, GroupElement, MultiPoly, VarSet
from .scalar import CycNum, QSeries, to_rational
from .t2 import series

logger = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(os.path.dirname(os.path.realpath(__file__)), "schema", "problem.schema.json")


def load_schema() -> dict:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def schema_violations(data) -> list[dict]:
    validator = Draft202012Validator(load_schema())
    out = []
    for error in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path))):
        out.append({"pointer": _pointer(error.absolute_path), "message": error.message})
    return out


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    variables: tuple[str, ...]
    m: int
    precision: int
    potential: MultiPoly
    group: DiagonalGroup

    @property
    def varset(self) -> VarSet:
        return self.potential.varset

    def summary(self) -> dict:
        return {
            "name": self.name,
            "variables": list(self.variables),
            "cyclotomic_order": self.m,
            "precision": self.precision,
            "group_order": len(self.group),
            "generators": [self.group.key(g) for g in self.group.generators],
        }


def parse_scalar(ref, m: int, precision: int, pointer: str = "/") -> QSeries:
    try:
        return _scalar(ref, m, precision)
    except (ZeroDivisionError, ValueError, TypeError) as e:
        raise ProblemError(f"bad coefficient {ref!r}: {e}", [{"pointer": pointer, "message": str(e)}]) from e


def _scalar(ref, m: int, precision: int) -> QSeries:
    if not isinstance(ref, dict):
        return QSeries.constant(m, to_rational(ref))
    value = CycNum.from_rational(m, to_rational(ref.get("rational", 1)))
    if "root" in ref:
        value = value * CycNum.root(m, ref["root"])
    if "cyc" in ref:
        if len(ref["cyc"]) > m:
            raise ProblemError(f"cyclotomic vector longer than m = {m}")
        value = value * CycNum.from_vector(m, ref["cyc"])
    if "series" not in ref:
        return QSeries.constant(m, value)
    try:
        return series(ref["series"], precision, m) * value
    except ValueError as e:
        raise ProblemError(f"unsupported cyclotomic order for series {ref['series']!r}: {e}") from e


def build_problem(data: dict, precision: int | None = None, *, bound: int = GROUP_BOUND) -> ProblemSpec:
    violations = schema_violations(data)
    if violations:
        raise ProblemError(f"{len(violations)} schema violation(s)", violations)
    names = tuple(data["variables"])
    n = len(names)
    m = data["cyclotomic_order"]
    N = precision or data.get("precision") or DEFAULT_PRECISION

    violations = []
    for k, term in enumerate(data["potential"]):
        if len(term["exps"]) != n:
            violations.append({"pointer": f"/potential/{k}/exps",
                               "message": f"expected {n} exponents, got {len(term['exps'])}"})
    for k, gen in enumerate(data["group"]):
        if len(gen) != n:
            violations.append({"pointer": f"/group/{k}", "message": f"expected {n} exponents, got {len(gen)}"})
    if violations:
        raise ProblemError(f"{len(violations)} shape violation(s)", violations)

    vs = VarSet(names)
    terms: dict[tuple[int, ...], QSeries] = {}
    for k, term in enumerate(data["potential"]):
        exps = tuple(term["exps"])
        c = parse_scalar(term["coeff"], m, N, f"/potential/{k}/coeff")
        terms[exps] = terms[exps] + c if exps in terms else c
    W = MultiPoly(vs, m, terms)

    gens = [GroupElement(m, tuple(g)) for g in data["group"]]
    try:
        group = DiagonalGroup.generate(gens, m=m, n=n, bound=bound)
    except OrbijacError as e:
        raise ProblemError(str(e)) from e

    check_invariant(W, group)
    spec = ProblemSpec(data.get("name", "problem"), names, m, N, W, group)
    logger.debug("loaded %s: %d terms, group of order %d", spec.name, len(W.terms), len(group))
    return spec


def load(path: str, precision: int | None = None) -> ProblemSpec:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ProblemError(f"problem file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ProblemError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return build_problem(data, precision)
