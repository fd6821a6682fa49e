"""Command dispatch for the orbijac script.

Every command returns ``(exit_code, payload)``; payloads are JSON-ready dicts
with an ``ok`` flag. Exit codes: 0 all checks pass, 1 a verification failed,
2 bad input.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

from .errors import InvarianceError, OrbijacError, ProblemError, UsageError
from .mf import (
    build_kernel_stack,
    diagonal_kernel,
    equivariant_modify,
    mfabc_check,
    sector_complex,
)
from .orbjac import check_algebra, invariant_part, twisted_algebra
from .poly import diff_quotient
from .problem import ProblemSpec, load
from .t2 import SERIES_NAMES, run_report, series

logger = logging.getLogger(__name__)

COMMANDS = ("sectors", "table", "sigma", "verify-kernel", "t2", "qseries")
REPORTS = ("json", "pretty")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

MIN_ORDER = {"t2": 26, "qseries": 1}


@dataclass
class Flags:
    order: int | None = None
    g: str | None = None
    h: str | None = None
    name: str | None = None
    report: str = "json"
    out: str | None = None


def _verdict(payload: dict) -> int:
    return EXIT_OK if payload.get("ok") else EXIT_FAILED


def cmd_sectors(spec: ProblemSpec) -> dict:
    alg = twisted_algebra(spec.potential, spec.group)
    orb = invariant_part(alg)
    inv = orb.dims()
    rows = []
    for h in spec.group:
        rows.append({
            "sector": spec.group.key(h),
            "d": h.d,
            "parity": h.parity,
            "dim": len(alg.sectors[h].jac.basis),
            "invariant_dim": inv[h],
        })
    return {"ok": True, "problem": spec.summary(), "sectors": rows, "invariant_dim": len(orb.basis)}


def cmd_table(spec: ProblemSpec) -> dict:
    alg = twisted_algebra(spec.potential, spec.group)
    orb = invariant_part(alg)
    table = orb.to_json()
    checks = check_algebra(orb)
    failures = [k for k in ("unit", "graded_commutativity", "associativity") if not checks[k]["ok"]]
    return {"ok": checks["ok"], "problem": spec.summary(), **table, "checks": checks, "failures": failures}


def cmd_sigma(spec: ProblemSpec, flags: Flags) -> dict:
    if flags.g is None or flags.h is None:
        raise UsageError("sigma needs --g and --h")
    group = spec.group
    try:
        g, h = group.parse(flags.g), group.parse(flags.h)
    except ValueError as e:
        raise UsageError(str(e)) from e
    alg = twisted_algebra(spec.potential, group)
    s = alg.sigma(g, h)
    total = g.d + h.d - (g * h).d
    return {
        "ok": True,
        "g": group.key(g),
        "h": group.key(h),
        "gh": group.key(g * h),
        "d": total / 2 if total % 2 else total // 2,
        "sigma": s.to_json(),
        "text": str(s),
    }


def cmd_verify_kernel(spec: ProblemSpec) -> dict:
    W, group = spec.potential, spec.group
    kernel = diagonal_kernel(W)
    base = kernel.check()
    emf = equivariant_modify(kernel, group)
    stack = build_kernel_stack(emf)
    summands = stack.check()
    composition = stack.composition_failures()
    sectors = []
    for h in group:
        res = sector_complex(kernel, h).check()
        sectors.append({"sector": group.key(h), **res})
    payload = {
        "problem": spec.summary(),
        "kernel": base,
        "equivariance": emf.check(),
        "summands": summands,
        "composition_ok": not composition,
        "composition_failures": composition,
        "sector_complexes": sectors,
    }
    if W.varset.n == 3:
        f = [diff_quotient(W, i, source=0, target=1, convention="tail") for i in range(3)]
        payload["mfabc"] = mfabc_check(W, f)
    failures = []
    if not base["ok"]:
        failures.append("kernel")
    if not payload["equivariance"]["ok"]:
        failures.append("equivariance")
    failures += [f"summand {s['summand']}" for s in summands if not (s["squares_ok"] and s["equivariance_ok"])]
    if not payload["composition_ok"]:
        failures.append("composition")
    failures += [f"sector {s['sector']}" for s in sectors if not s["ok"]]
    if "mfabc" in payload and not payload["mfabc"]["ok"]:
        failures.append("mfabc")
    payload["failures"] = failures
    payload["ok"] = not failures
    return payload


def cmd_qseries(flags: Flags) -> dict:
    if flags.name not in SERIES_NAMES:
        raise UsageError(f"qseries needs --name in {SERIES_NAMES}")
    s = series(flags.name, flags.order) if flags.order else series(flags.name)
    coeffs = {}
    for e, c in s.coeffs.items():
        coeffs[str(e)] = str(c.rational()) if c.is_rational() else c.to_json()
    return {"ok": True, "name": flags.name, "order": int(s.prec), "coefficients": coeffs}


def dispatch(command: str, spec: ProblemSpec | None, flags: Flags) -> tuple[int, dict]:
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    if command in ("sectors", "table", "sigma", "verify-kernel") and spec is None:
        raise UsageError(f"{command} needs a problem file")
    if flags.order is not None and flags.order < MIN_ORDER.get(command, 1):
        raise UsageError(f"{command} needs --order >= {MIN_ORDER.get(command, 1)}")

    if command == "sectors":
        payload = cmd_sectors(spec)
    elif command == "table":
        payload = cmd_table(spec)
    elif command == "sigma":
        payload = cmd_sigma(spec, flags)
    elif command == "verify-kernel":
        payload = cmd_verify_kernel(spec)
    elif command == "t2":
        payload = run_report(flags.order) if flags.order else run_report()
    else:
        payload = cmd_qseries(flags)
    return _verdict(payload), payload


def run(command: str, problem: str | None, flags: Flags) -> tuple[int, dict]:
    """Load, dispatch and map errors to exit codes."""
    try:
        spec = load(problem, flags.order) if problem and command not in ("t2", "qseries") else None
        return dispatch(command, spec, flags)
    except ProblemError as e:
        return EXIT_INPUT, {"ok": False, "error": str(e), "violations": e.violations}
    except (InvarianceError, UsageError) as e:
        return EXIT_INPUT, {"ok": False, "error": str(e)}
    except OrbijacError as e:
        logger.error("%s failed: %s", command, e)
        return EXIT_FAILED, {"ok": False, "error": str(e), "failures": [type(e).__name__]}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def to_json(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "ok" if value else "FAIL"
    if isinstance(value, (dict, list)):
        return json.dumps(value, ensure_ascii=False, sort_keys=True)
    return str(value)


def to_pretty(payload: dict) -> str:
    lines = []
    rows = payload.get("checks") if isinstance(payload.get("checks"), list) else payload.get("sectors")
    scalars = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
    width = max((len(k) for k in scalars), default=0)
    for k in sorted(scalars):
        lines.append(f"{k.ljust(width)}  {_cell(scalars[k])}")
    if rows:
        keys = [k for k in rows[0] if not isinstance(rows[0][k], (dict, list))]
        widths = {k: max(len(k), *(len(_cell(r.get(k))) for r in rows)) for k in keys}
        lines.append("")
        lines.append("  ".join(k.ljust(widths[k]) for k in keys))
        for r in rows:
            lines.append("  ".join(_cell(r.get(k)).ljust(widths[k]) for k in keys))
    coeffs = payload.get("coefficients")
    if isinstance(coeffs, dict) and coeffs:
        lines.append("")
        for e in sorted(coeffs, key=int):
            lines.append(f"q^{e}  {_cell(coeffs[e])}")
    if payload.get("failures"):
        lines.append("")
        lines.append("failures: " + ", ".join(map(str, payload["failures"])))
    return "\n".join(lines)


def render(payload: dict, report: str = "json") -> str:
    if report not in REPORTS:
        raise ValueError(f"report must be one of {REPORTS}")
    return to_pretty(payload) if report == "pretty" else to_json(payload)


def write_atomic(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(text)
        f.write("\n")
    os.replace(tmp, path)
