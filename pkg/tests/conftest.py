import os
import random
import sys

import pytest

BASEDIR = os.path.dirname(os.path.dirname(os.path.realpath(__file__)))
LIBDIR = os.path.join(BASEDIR, "lib")
PROBLEMS = os.path.join(BASEDIR, "problems")

if LIBDIR not in sys.path:
    sys.path.insert(0, LIBDIR)

from orbijac.orbjac import invariant_part  # noqa: E402
from orbijac.poly import MultiPoly, VarSet  # noqa: E402
from orbijac.t2 import t2_algebra  # noqa: E402

# moderate precision keeps the T² suite fast; the CLI default is 200
T2_PRECISION = 60
FULL_PRECISION = 200


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs the T² example at q-precision 200")


@pytest.fixture(scope="session")
def t2_alg():
    alg = t2_algebra(T2_PRECISION)
    alg.compute_table()
    return alg


@pytest.fixture(scope="session")
def t2_orb(t2_alg):
    return invariant_part(t2_alg)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def problems_dir():
    return PROBLEMS


def random_poly(rng: random.Random, varset: VarSet, m: int, *, max_degree: int = 4, terms: int = 5) -> MultiPoly:
    """Random polynomial with small integer coefficients."""
    out = {}
    for _ in range(terms):
        exps = [0] * varset.size
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(varset.size)] += 1
        out[tuple(exps)] = rng.choice([-3, -2, -1, 1, 2, 3])
    return MultiPoly(varset, m, out)
