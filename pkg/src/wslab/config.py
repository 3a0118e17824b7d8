"""Limits, tolerances and environment switches shared by all modules."""

import os

from .errors import ValidationError

MAX_D = 8
MAX_N = 24

# Commutation relations are exact for every built-in construction.
COMMUTATION_TOL = 1e-12
# Relative tolerance for comparing moments against box products of bounds.
GOOD_RTOL = 1e-9

_DEFAULT_TOL = 1e-9


def default_tol():
    """Contractivity / gap tolerance, overridable through ``WSLAB_TOL``."""
    raw = os.environ.get("WSLAB_TOL")
    if raw is None or raw.strip() == "":
        return _DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        value = float("nan")
    if not value > 0:
        raise ValidationError(f"WSLAB_TOL must be a positive number, got {raw!r}")
    return value


def jit_disabled():
    """True when ``WSLAB_NO_JIT`` asks for the pure numpy kernels."""
    return os.environ.get("WSLAB_NO_JIT", "").strip().lower() in ("1", "true", "yes", "on")
