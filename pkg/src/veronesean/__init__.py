"""Exact-arithmetic toolkit for Veronese varieties and Veronesean caps over GF(p)."""

from .gfp import INFINITY, PrimeField, ProjParam, crossratio_params
from .projlin import ProjPoint, ProjSubspace, fit_projective_map, intersect, project_from, span

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "PrimeField",
    "ProjParam",
    "ProjPoint",
    "ProjSubspace",
    "crossratio_params",
    "fit_projective_map",
    "intersect",
    "project_from",
    "span",
    "__version__",
]
