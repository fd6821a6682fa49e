"""Exact computations with orbifold Jacobian algebras of LG orbifolds."""

from .errors import OrbijacError
from .poly import DiagonalGroup, GroupElement, MultiPoly, VarSet
from .scalar import CycNum, QSeries

__all__ = ["CycNum", "DiagonalGroup", "GroupElement", "MultiPoly", "OrbijacError", "QSeries", "VarSet"]
