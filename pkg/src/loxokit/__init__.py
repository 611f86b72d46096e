"""loxokit: distinguished curves of two-dimensional Moebius geometry.

Conformal circles, ordinal conformal loxodromes and the fourth-order snap
equation, together with the adjoint-tractor calculus and flat-model
loxodrome theory needed to verify their invariance numerically.
"""

from ._kernel import DEFAULT_BACKEND, available_backends
from .engine import (
    CurveTrace,
    IntegratorConfig,
    conformal_circle_rhs,
    dk4_rhs,
    integrate,
    invariance_experiment,
    ordinal_loxodrome_rhs,
)
from .kinematics import KinematicState, SymbolicCurve, jet_from_curve, transform_state
from .mobius import (
    ConformalRescaling,
    MobiusStructure,
    flat_structure,
    rescale_structure,
    structure_for_metric,
)
from .tensors import (
    MetricField,
    cylinder_metric,
    flat_metric,
    hyperbolic_metric,
    isothermal_metric,
    sphere_metric,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BACKEND",
    "available_backends",
    "CurveTrace",
    "IntegratorConfig",
    "integrate",
    "invariance_experiment",
    "conformal_circle_rhs",
    "ordinal_loxodrome_rhs",
    "dk4_rhs",
    "KinematicState",
    "SymbolicCurve",
    "jet_from_curve",
    "transform_state",
    "ConformalRescaling",
    "MobiusStructure",
    "flat_structure",
    "structure_for_metric",
    "rescale_structure",
    "MetricField",
    "flat_metric",
    "sphere_metric",
    "hyperbolic_metric",
    "cylinder_metric",
    "isothermal_metric",
    "__version__",
]
