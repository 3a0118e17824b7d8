"""Numerical laboratory for d-variable weighted shift operators."""

from .calculus import (
    Polynomial,
    eval_poly,
    op_norm,
    quad_vn_check,
    slice_coefficients,
    sup_norm,
    takagi,
    vn_gap,
)
from .dilation import (
    balanced_profile,
    classify_indices,
    normalize_to_x0,
    random_table,
    scale_step,
    scaling_radius,
    spherical_isometry_check,
)
from .errors import ConvergenceError, NoScalablePairs, ValidationError
from .shift import (
    WeightTable,
    adjoint_apply,
    build_shift,
    check_commutation,
    classify,
    family,
    moments,
)

__all__ = [
    "ConvergenceError",
    "NoScalablePairs",
    "Polynomial",
    "ValidationError",
    "WeightTable",
    "adjoint_apply",
    "balanced_profile",
    "build_shift",
    "check_commutation",
    "classify",
    "classify_indices",
    "eval_poly",
    "family",
    "moments",
    "normalize_to_x0",
    "op_norm",
    "quad_vn_check",
    "random_table",
    "scale_step",
    "scaling_radius",
    "slice_coefficients",
    "spherical_isometry_check",
    "sup_norm",
    "takagi",
    "vn_gap",
]
