"""Deterministic multi-structure geometric fitting toolkit."""

from . import errors
from .models import (
    AFFINE_FUNDAMENTAL,
    HOMOGRAPHY,
    LINE2D,
    ConstraintRow,
    Datum,
    ModelClass,
    ModelParams,
    algebraic_residual,
    build_rows,
    geometric_residual,
    model_class,
    solve_dlt,
)

__all__ = [
    "errors",
    "AFFINE_FUNDAMENTAL",
    "HOMOGRAPHY",
    "LINE2D",
    "ConstraintRow",
    "Datum",
    "ModelClass",
    "ModelParams",
    "algebraic_residual",
    "build_rows",
    "geometric_residual",
    "model_class",
    "solve_dlt",
]

__version__ = "0.1.0"
