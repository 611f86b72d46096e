"""Integrator core with backend selection.

The compiled extension is preferred when it imported successfully; the
pure-Python twin is always available.  Both expose the same functions
(``run``, ``rhs_once``, ``residuals_once``, ``eval_scalar``) and produce
bit-identical trajectories.
"""

from . import programs
from . import purepy
from .programs import (
    PackedStructure,
    SYSTEM_CIRCLE,
    SYSTEM_DK4,
    SYSTEM_LOXODROME,
    state_dim,
)
from .purepy import (
    REASON_CHART_ESCAPE,
    REASON_COMPLETED,
    REASON_DEGENERATE_JERK,
    REASON_DRIFT,
    REASON_NONFINITE,
    REASON_SAMPLE_LIMIT,
    REASON_STEP_UNDERFLOW,
    REASON_TEXT,
    SCHEME_RK4,
    SCHEME_RK45,
)

try:
    from . import _fastcore
except ImportError:
    _fastcore = None

DEFAULT_BACKEND = "compiled" if _fastcore is not None else "python"


def available_backends():
    names = ["python"]
    if _fastcore is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name=None):
    """Return the backend module for ``name`` (None picks the default)."""
    if name is None or name == "default":
        name = DEFAULT_BACKEND
    if name == "compiled":
        if _fastcore is None:
            raise RuntimeError("compiled backend is not available in this install")
        return _fastcore
    if name == "python":
        return purepy
    raise ValueError(f"unknown backend {name!r} (expected 'compiled' or 'python')")
