"""First-order systems for the invariant curve equations plus the integrator
front end.

Three systems share the state layout (x, U, A, ...):

  circle     x, U, A            third-order conformal-circle equation
  loxodrome  x, U, A, J, kappa  fifth-order ordinal-loxodrome system
  dk4        x, U, A, J         fourth-order snap equation S_a = K_ab U^b

Stepping happens in the kernel backend (compiled when available); this
module owns configuration, validation, trace bookkeeping, and the
gauge-change experiment that checks conformal invariance numerically.
Constraints are monitored rather than projected by default, so integration
failures surface as abort reasons instead of being silently repaired.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from . import _kernel
from ._kernel import (
    REASON_TEXT,
    SCHEME_RK4,
    SCHEME_RK45,
    SYSTEM_CIRCLE,
    SYSTEM_DK4,
    SYSTEM_LOXODROME,
    state_dim,
)
from .kinematics import DegenerateJerkError, KinematicState, transform_state
from .mobius import ConformalRescaling, MobiusStructure, rescale_structure
from .tractor import lift_curve_derivative, lift_velocity, null_residual

__all__ = [
    "IntegratorConfig",
    "CurveTrace",
    "integrate",
    "conformal_circle_rhs",
    "ordinal_loxodrome_rhs",
    "dk4_rhs",
    "invariance_experiment",
    "polyline_distance",
    "line_preservation_residual",
    "lift_null_residual",
    "SYSTEMS",
]

SYSTEMS = {"circle": SYSTEM_CIRCLE, "loxodrome": SYSTEM_LOXODROME, "dk4": SYSTEM_DK4}

_SCHEMES = {
    "rk4-fixed": SCHEME_RK4,
    "rk4": SCHEME_RK4,
    "rk45-adaptive": SCHEME_RK45,
    "rk45": SCHEME_RK45,
}


@dataclass
class IntegratorConfig:
    scheme: str = "rk4-fixed"
    step: float = 1e-3               # arc-length units; initial guess for rk45
    tol: float = 1e-9                # adaptive error target (abs and rel)
    max_length: float = 10.0
    drift_abort: float = 1e-6        # constraint-residual abort threshold
    jerk_threshold: float = 1e-10
    renormalize: bool = False
    chart_bound: float = 1e6
    record_every: int = 1
    max_samples: int = 2_000_000
    init_tol: float = 1e-10

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def scheme_id(self) -> int:
        return _SCHEMES[self.scheme]

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "step": self.step,
            "tol": self.tol,
            "max_length": self.max_length,
            "drift_abort": self.drift_abort,
            "jerk_threshold": self.jerk_threshold,
            "renormalize": self.renormalize,
            "chart_bound": self.chart_bound,
            "record_every": self.record_every,
        }


class CurveTrace:
    """Ordered (s, state) samples with per-sample constraint residuals."""

    def __init__(self, system: str, n: int, samples: np.ndarray, reason: int,
                 structure: MobiusStructure, config: IntegratorConfig, backend: str):
        self.system = system
        self.n = n
        self.samples = samples
        self.reason_code = reason
        self.reason = REASON_TEXT[reason]
        self.structure = structure
        self.config = config
        self.backend = backend
        self.ydim = state_dim(SYSTEMS[system], n)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def s(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 1 : 1 + self.n]

    @property
    def U(self) -> np.ndarray:
        return self.samples[:, 1 + self.n : 1 + 2 * self.n]

    @property
    def A(self) -> np.ndarray:
        return self.samples[:, 1 + 2 * self.n : 1 + 3 * self.n]

    @property
    def J(self) -> np.ndarray | None:
        if self.system == "circle":
            return None
        return self.samples[:, 1 + 3 * self.n : 1 + 4 * self.n]

    @property
    def kappa(self) -> np.ndarray | None:
        if self.system != "loxodrome":
            return None
        return self.samples[:, 1 + 4 * self.n]

    @property
    def residuals(self) -> np.ndarray:
        return self.samples[:, 1 + self.ydim : 1 + self.ydim + 4]

    def state(self, i: int) -> KinematicState:
        n = self.n
        row = self.samples[i]
        J = None if self.system == "circle" else row[1 + 3 * n : 1 + 4 * n].copy()
        kap = None if self.system != "loxodrome" else float(row[1 + 4 * n])
        return KinematicState(x=row[1 : 1 + n].copy(), U=row[1 + n : 1 + 2 * n].copy(),
                              A=row[1 + 2 * n : 1 + 3 * n].copy(), J=J, kappa=kap,
                              gauge=self.structure.label)

    def final_state(self) -> KinematicState:
        return self.state(len(self) - 1)

    def max_residuals(self) -> dict:
        res = self.residuals
        out = {}
        for j, name in enumerate(("unit", "orthoA", "orthoJ", "null")):
            col = res[:, j]
            finite = col[np.isfinite(col)]
            out[name] = float(finite.max()) if finite.size else None
        return out

    def summary(self) -> dict:
        return {
            "system": self.system,
            "n": self.n,
            "backend": self.backend,
            "structure": self.structure.label,
            "termination": self.reason,
            "samples": int(len(self)),
            "s_start": float(self.s[0]),
            "s_end": float(self.s[-1]),
            "max_residuals": self.max_residuals(),
            "config": self.config.as_dict(),
        }

    # -- CSV emission ----------------------------------------------------

    def csv_header(self) -> str:
        n = self.n
        cols = ["s"]
        cols += [f"x{i+1}" for i in range(n)]
        cols += [f"U{i+1}" for i in range(n)]
        cols += [f"A{i+1}" for i in range(n)]
        cols += [f"J{i+1}" for i in range(n)]
        cols += ["kappa", "res_unit", "res_orthoA", "res_orthoJ", "res_null"]
        return ",".join(cols)

    def write_csv(self, target) -> None:
        """Write the trace; every numeric field carries 17 significant
        digits, columns that do not apply to the system stay empty."""
        n = self.n
        close = False
        if isinstance(target, (str, bytes)):
            fh = open(target, "w")
            close = True
        else:
            fh = target
        try:
            fh.write(self.csv_header() + "\n")
            has_J = self.system != "circle"
            has_kappa = self.system == "loxodrome"
            for row in self.samples:
                parts = [_fmt(row[0])]
                parts += [_fmt(v) for v in row[1 : 1 + 3 * n]]
                if has_J:
                    parts += [_fmt(v) for v in row[1 + 3 * n : 1 + 4 * n]]
                else:
                    parts += [""] * n
                parts.append(_fmt(row[1 + 4 * n]) if has_kappa else "")
                res = row[1 + self.ydim : 1 + self.ydim + 4]
                parts += [_fmt(v) if math.isfinite(v) else "" for v in res]
                fh.write(",".join(parts) + "\n")
        finally:
            if close:
                fh.close()

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _fmt(v: float) -> str:
    return "%.17g" % v


def _validate_init(system: str, init: KinematicState, structure: MobiusStructure,
                   config: IntegratorConfig, backend) -> np.ndarray:
    y0 = init.as_vector(system)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial data contains non-finite values")
    ps = structure.packed(with_drho=(system == "dk4"))
    res = backend.residuals_once(ps, SYSTEMS[system], y0)
    checks = {"unit": res[0], "orthoA": res[1]}
    if system != "circle":
        checks["orthoJ"] = res[2]
    for name, value in checks.items():
        if value > config.init_tol:
            raise ValueError(
                f"initial data violates the {name} constraint "
                f"(residual {value:.3e} > {config.init_tol:.1e})")
    if system == "loxodrome":
        g_inv = structure.metric.g_inv(init.x)
        jn = math.sqrt(float(init.J @ g_inv @ init.J))
        if jn < config.jerk_threshold:
            raise DegenerateJerkError(
                f"initial jerk is degenerate (|J| = {jn:.3e} below "
                f"{config.jerk_threshold:.1e}); kappa is undefined")
    return y0


def integrate(system: str, init: KinematicState, structure: MobiusStructure,
              config: IntegratorConfig, backend: str | None = None) -> CurveTrace:
    """Integrate one curve; the trace records every retained sample with its
    constraint residuals and the termination reason (never silent)."""
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r} (expected circle/loxodrome/dk4)")
    impl = _kernel.get_backend(backend)
    y0 = _validate_init(system, init, structure, config, impl)
    ps = structure.packed(with_drho=(system == "dk4"))
    rows, reason = impl.run(
        ps, SYSTEMS[system], y0, 0.0, config.max_length, config.scheme_id(),
        config.step, config.tol, config.drift_abort, config.jerk_threshold,
        config.chart_bound, config.renormalize, config.record_every,
        config.max_samples,
    )
    return CurveTrace(system, structure.n, rows, reason, structure, config,
                      impl.BACKEND_NAME)


def _rhs(system: str, state, structure: MobiusStructure, backend=None) -> np.ndarray:
    impl = _kernel.get_backend(backend)
    y = state.as_vector(system) if isinstance(state, KinematicState) else np.asarray(state, float)
    ps = structure.packed(with_drho=(system == "dk4"))
    return impl.rhs_once(ps, SYSTEMS[system], y)


def conformal_circle_rhs(state, structure: MobiusStructure, backend=None) -> np.ndarray:
    """d/ds of (x, U, A) for the third-order conformal-circle equation."""
    return _rhs("circle", state, structure, backend)


def ordinal_loxodrome_rhs(state, structure: MobiusStructure, backend=None) -> np.ndarray:
    """d/ds of (x, U, A, J, kappa) for the fifth-order loxodrome system."""
    return _rhs("loxodrome", state, structure, backend)


def dk4_rhs(state, structure: MobiusStructure, backend=None) -> np.ndarray:
    """d/ds of (x, U, A, J) for the fourth-order snap equation."""
    return _rhs("dk4", state, structure, backend)


# ---------------------------------------------------------------------------
# trace geometry


def _one_sided_distance(P: np.ndarray, Q: np.ndarray) -> float:
    """max over points of P of the distance to the polyline Q."""
    if Q.shape[0] == 1:
        return float(np.max(np.linalg.norm(P - Q[0], axis=1)))
    tree = cKDTree(Q)
    _, idx = tree.query(P, k=1)
    best = np.full(P.shape[0], np.inf)
    for shift in (-1, 0):
        j = np.clip(idx + shift, 0, Q.shape[0] - 2)
        a = Q[j]
        b = Q[j + 1]
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        denom[denom == 0.0] = 1.0
        t = np.clip(np.einsum("ij,ij->i", P - a, ab) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.linalg.norm(P - proj, axis=1)
        best = np.minimum(best, d)
    return float(best.max())


def polyline_distance(P, Q) -> float:
    """Symmetric max-min distance between two polylines in chart coordinates."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return max(_one_sided_distance(P, Q), _one_sided_distance(Q, P))


def _arc_length_integral(trace: CurveTrace, values: np.ndarray) -> float:
    """Integral of a sampled quantity over arc length (Simpson on the uniform
    part of the grid, trapezoid on the leftovers)."""
    s = trace.s
    if len(s) < 2:
        return 0.0
    h = np.diff(s)
    uniform = np.allclose(h, h[0], rtol=0.0, atol=1e-12 * max(1.0, abs(s[-1])))
    if uniform and len(s) >= 3:
        m = len(s) - 1
        m_even = m if m % 2 == 0 else m - 1
        hs = h[0]
        f = values
        total = 0.0
        for i in range(0, m_even, 2):
            total += hs / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2])
        if m_even < m:
            total += 0.5 * h[-1] * (f[-2] + f[-1])
        return float(total)
    return float(np.trapezoid(values, s))


def invariance_experiment(structure: MobiusStructure, rescaling: ConformalRescaling,
                          init: KinematicState, config: IntegratorConfig,
                          system: str = "loxodrome", backend=None) -> dict:
    """Integrate the same curve equation in gauge g and in gauge omega^2 g.

    The initial data is moved by the component transformation laws, the
    rescaled run receives the arc-length budget of the base trace measured in
    the new gauge, and the report carries the symmetric trace distance plus
    the worst constraint residual of transformed base states checked in the
    new gauge.
    """
    base = integrate(system, init, structure, config, backend=backend)

    omega_along = np.array([rescaling.omega_value(x) for x in base.x])
    hat_length = _arc_length_integral(base, omega_along)

    hat_structure = rescale_structure(structure, rescaling)
    hat_init = transform_state(init, rescaling, structure.metric,
                               gauge=hat_structure.label)
    # match the base run's chart-space sampling density: where omega is small
    # one unit of rescaled arc length sweeps a long way across the chart, so
    # the rescaled polyline needs proportionally finer steps for its chords
    # to track the curve at comparable resolution
    omega_min = float(omega_along.min())
    hat_step = max(config.step * omega_min, hat_length / 2e6)
    hat_config = replace(config, max_length=hat_length, step=hat_step)
    hat = integrate(system, hat_init, hat_structure, hat_config, backend=backend)

    distance = polyline_distance(base.x, hat.x)

    stride = max(1, len(base) // 200)
    worst = 0.0
    for i in range(0, len(base), stride):
        st = base.state(i)
        hst = transform_state(st, rescaling, structure.metric)
        g = hat_structure.metric.g(hst.x)
        worst = max(worst, abs(float(hst.U @ g @ hst.U) - 1.0),
                    abs(float(hst.U @ hst.A)))
        if hst.J is not None:
            worst = max(worst, abs(float(hst.U @ hst.J)))
    return {
        "system": system,
        "trace_distance": distance,
        "transformed_constraint_residual": worst,
        "base": base.summary(),
        "rescaled": hat.summary(),
        "rescaled_length_budget": hat_length,
        "base_trace": base,
        "rescaled_trace": hat,
    }


def line_preservation_residual(state: KinematicState, structure: MobiusStructure) -> float:
    """Norm of d(lift) + kappa * lift with the loxodrome evolution
    substituted; zero along ordinal loxodromes (the line-subbundle claim)."""
    g_inv = structure.metric.g_inv(state.x)
    P = structure.rho_value(state.x)
    AA = float(state.A @ g_inv @ state.A)
    PUU = float(state.U @ P @ state.U)
    dkappa = -0.5 * (AA + state.kappa ** 2) - PUU
    D = lift_curve_derivative(state, structure, dkappa)
    T = lift_velocity(state, structure.metric)
    R = D.add(T.scaled(state.kappa))
    return float(np.linalg.norm(R.as_array()))


def lift_null_residual(state: KinematicState, structure: MobiusStructure) -> float:
    """The null-condition residual of the velocity lift at one state."""
    T = lift_velocity(state, structure.metric)
    return abs(null_residual(T, structure.metric, state.x))
