"""Orbifold Jacobian algebras of Landau-Ginzburg orbifolds (W, H).

Usage:
- python orbijac.py sectors problems/t2.json
- python orbijac.py table problems/fermat4.json
- python orbijac.py sigma problems/t2.json --g 1,1,1 --h 2,2,2
- python orbijac.py verify-kernel problems/t2.json --order 60
- python orbijac.py t2 --order 200 --report pretty
- python orbijac.py qseries --name psi --order 50

Group elements are comma-joined exponents over ζ_e, e the exponent of the group.
Environment: ORBIJAC_PRECISION, ORBIJAC_LOG_LEVEL and the rest of orbijac.config.
"""

from __future__ import annotations

import logging
import os
import sys

# Local paths (repo-relative)
BASEDIR = os.path.dirname(os.path.realpath(__file__))
LIBDIR = os.path.join(BASEDIR, "lib")

if os.path.exists(LIBDIR):
    sys.path.insert(0, LIBDIR)

from orbijac import cli  # noqa: E402
from orbijac.config import LOG_LEVEL  # noqa: E402


if __name__ == "__main__":
    import argparse

    logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.WARNING))

    ap = argparse.ArgumentParser()
    ap.add_argument(
        "cmd",
        choices=list(cli.COMMANDS),
        help="sectors | table | sigma | verify-kernel | t2 | qseries",
    )
    ap.add_argument("problem", nargs="?", help="problem JSON (sectors, table, sigma, verify-kernel)")
    ap.add_argument("--order", type=int, help="q-precision N (default: env ORBIJAC_PRECISION or 200)")
    ap.add_argument("--g", help="group element, e.g. 1,1,1")
    ap.add_argument("--h", help="group element, e.g. 2,2,2")
    ap.add_argument("--name", choices=["phi", "psi", "gamma"], help="series for qseries")
    ap.add_argument("--report", choices=list(cli.REPORTS), default="json")
    ap.add_argument("--out", help="also write the JSON result to this path")
    args = ap.parse_args()

    flags = cli.Flags(order=args.order, g=args.g, h=args.h, name=args.name, report=args.report, out=args.out)
    code, r = cli.run(args.cmd, args.problem, flags)
    if args.out:
        cli.write_atomic(args.out, cli.to_json(r))
    print(cli.render(r, args.report))
    sys.exit(code)
