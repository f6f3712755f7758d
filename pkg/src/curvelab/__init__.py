"""Differential geometry of parametric surfaces on truncated Taylor jets.

Fundamental forms, Christoffel symbols and Beltrami operators of the three
fundamental forms, least-squares detection of coordinate finite type, and
closed-form cross-checks for ruled surfaces and quadrics.
"""

__version__ = "0.1.0"

from .errors import CurvelabError
from .finitetype import (
    BeltramiTransformer,
    GaussMapFiniteType,
    PositionAffineFiniteType,
    classify,
    fit_gauss_matrix,
    fit_position_affine,
    sample,
)
from .forms import evaluate_frame
from .surfaces import CurvePair, SurfacePatch, make_surface

__all__ = [
    "__version__",
    "BeltramiTransformer",
    "CurvePair",
    "CurvelabError",
    "GaussMapFiniteType",
    "PositionAffineFiniteType",
    "SurfacePatch",
    "classify",
    "evaluate_frame",
    "fit_gauss_matrix",
    "fit_position_affine",
    "make_surface",
    "sample",
]
