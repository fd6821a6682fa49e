"""Runtime settings.

Every knob is a module-level constant read from an ``ORBIJAC_*`` environment
variable with a default, so the CLI and the tests see the same values.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

logger = logging.getLogger(__name__)

# q-precision N used when a problem or flag does not give one
DEFAULT_PRECISION = int(os.environ.get("ORBIJAC_PRECISION", "200"))

# Cyclotomic order for named series built outside a problem (contains i and ζ₃)
DEFAULT_CYCLOTOMIC_ORDER = int(os.environ.get("ORBIJAC_CYCLOTOMIC_ORDER", "12"))

# Standard-monomial enumeration stops here and reports a non-isolated singularity
DEGREE_CAP = int(os.environ.get("ORBIJAC_DEGREE_CAP", "40"))

GROUP_BOUND = int(os.environ.get("ORBIJAC_GROUP_BOUND", "64"))

# Relative precision (prec - valuation) every Groebner coefficient must keep
MIN_RELATIVE_PRECISION = int(os.environ.get("ORBIJAC_MIN_RELATIVE_PRECISION", "8"))

LOG_LEVEL = os.environ.get("ORBIJAC_LOG_LEVEL", "WARNING").upper()

HWG_ORDERS = ("descending", "ascending")


@dataclass(frozen=True)
class Conventions:
    """Sign conventions entering the structure constants.

    hwg_order: word order of the quadratic terms of H_{W,g}. "descending" writes
        θ_iθ_j for j < i and reproduces the worked T² coefficients;
        "ascending" is the literal θ_jθ_i reading and differs by a global sign.
    upsilon_sign: apply (-1)^{|q1||p2|} inside Υ.
    """

    hwg_order: str = "descending"
    upsilon_sign: bool = True

    def __post_init__(self) -> None:
        if self.hwg_order not in HWG_ORDERS:
            raise ValueError(f"hwg_order must be one of {HWG_ORDERS}, got {self.hwg_order!r}")


def _env_conventions() -> Conventions:
    order = os.environ.get("ORBIJAC_HWG_ORDER", "descending").strip().lower()
    upsilon = os.environ.get("ORBIJAC_UPSILON_SIGN", "1").strip() not in ("0", "false", "no")
    conv = Conventions(hwg_order=order, upsilon_sign=upsilon)
    if conv != Conventions():
        logger.warning("Non-default sign conventions in effect: %s", conv)
    return conv


CONVENTIONS = _env_conventions()
