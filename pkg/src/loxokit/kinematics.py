"""Kinematic tower along a curve: tangent, acceleration, jerk, the curvature
density kappa, snap, and their behaviour under conformal rescaling.

Conventions: U^a is the unit tangent (upper index), A_a and J_a are lowered,
kappa is the scalar solving dJ_a + (A.J) U_a + 2 kappa J_a = 0 along the
curve.  The component transformation laws are

    U^a -> U^a / omega
    A_a -> A_a - Ups_a + (U.Ups) U_a
    J_a -> J_a / omega
    kappa -> (kappa + U.Ups) / omega

The division by omega in the kappa law is the weight factor of the density;
it is what makes the transformation involutive (rescaling by omega then
1/omega is the identity) and makes gauge-changed integrations retrace the
same curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .mobius import ConformalRescaling, MobiusStructure, cotton_york
from .tensors import MetricField

__all__ = [
    "KinematicState",
    "DegenerateJerkError",
    "SingularCurveError",
    "normalised_jerk",
    "kappa_from_jet",
    "normalised_snap",
    "k_two_form",
    "transform_state",
    "ordinal_defect",
    "constraint_residuals",
    "SymbolicCurve",
    "jet_from_curve",
]

DEFAULT_JERK_THRESHOLD = 1e-10


class DegenerateJerkError(ArithmeticError):
    """The curve osculates a conformal circle to third order; kappa is undefined."""


class SingularCurveError(ValueError):
    """Zero velocity: the curve is not regular at the requested parameter."""


@dataclass
class KinematicState:
    x: np.ndarray
    U: np.ndarray            # upper index
    A: np.ndarray            # lowered
    J: np.ndarray | None = None
    kappa: float | None = None
    gauge: str = ""

    def as_vector(self, system: str) -> np.ndarray:
        if system == "circle":
            parts = [self.x, self.U, self.A]
        elif system == "loxodrome":
            parts = [self.x, self.U, self.A, self.J, [self.kappa]]
        elif system == "dk4":
            parts = [self.x, self.U, self.A, self.J]
        else:
            raise ValueError(f"unknown system {system!r}")
        return np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in parts])

    def to_json(self) -> dict:
        """Flat JSON form, the same shape the CLI accepts as initial data."""
        out = {
            "x": [float(v) for v in self.x],
            "U": [float(v) for v in self.U],
            "A": [float(v) for v in self.A],
        }
        if self.J is not None:
            out["J"] = [float(v) for v in self.J]
        if self.kappa is not None:
            out["kappa"] = float(self.kappa)
        return out


def constraint_residuals(state: KinematicState, metric: MetricField) -> dict:
    g = metric.g(state.x)
    out = {
        "unit": abs(float(state.U @ g @ state.U) - 1.0),
        "orthoA": abs(float(state.U @ state.A)),
    }
    if state.J is not None:
        out["orthoJ"] = abs(float(state.U @ state.J))
    return out


def normalised_jerk(U, A, dA, P, g) -> np.ndarray:
    """J_a = dA_a + (A.A + P_UU) U_a - P_ab U^b  (dA is the arc-length
    covariant derivative of A along the curve)."""
    U = np.asarray(U, dtype=float)
    A = np.asarray(A, dtype=float)
    dA = np.asarray(dA, dtype=float)
    P = np.asarray(P, dtype=float)
    g = np.asarray(g, dtype=float)
    ginv = np.linalg.inv(g)
    U_lo = g @ U
    AA = float(A @ ginv @ A)
    PUU = float(U @ P @ U)
    return dA + (AA + PUU) * U_lo - P @ U


def kappa_from_jet(U, A, J, dJ, g, threshold: float = DEFAULT_JERK_THRESHOLD):
    """Solve dJ_a + (A.J) U_a + 2 kappa J_a = 0 for kappa.

    Returns (kappa, residual_norm): the least-squares kappa along J plus the
    norm of what is left over.  In two dimensions the leftover vanishes
    identically; in three it monitors conformal torsion.
    """
    U = np.asarray(U, dtype=float)
    A = np.asarray(A, dtype=float)
    J = np.asarray(J, dtype=float)
    dJ = np.asarray(dJ, dtype=float)
    g = np.asarray(g, dtype=float)
    ginv = np.linalg.inv(g)
    Jnorm = math.sqrt(float(J @ ginv @ J))
    if Jnorm < threshold:
        raise DegenerateJerkError(
            f"|J| = {Jnorm:.3e} below threshold {threshold:.3e}")
    AJ = float(A @ ginv @ J)
    F = dJ + AJ * (g @ U)
    k = -float(F @ ginv @ J) / (2.0 * float(J @ ginv @ J))
    leftover = F + 2.0 * k * J
    residual = math.sqrt(float(leftover @ ginv @ leftover))
    return k, residual


def normalised_snap(U, A, J, dJ, g) -> np.ndarray:
    """S_a = dJ_a + (A^b J_b) U_a."""
    U = np.asarray(U, dtype=float)
    A = np.asarray(A, dtype=float)
    J = np.asarray(J, dtype=float)
    dJ = np.asarray(dJ, dtype=float)
    g = np.asarray(g, dtype=float)
    ginv = np.linalg.inv(g)
    AJ = float(A @ ginv @ J)
    return dJ + AJ * (g @ U)


def k_two_form(structure: MobiusStructure, U, A, point) -> np.ndarray:
    """K_ab = -Y_abc U^c (dimensions 2 and 3; the Weyl part is identically
    zero there)."""
    if structure.n not in (2, 3):
        raise ValueError("K is implemented for dimensions 2 and 3 only")
    Y = cotton_york(structure, point)
    U = np.asarray(U, dtype=float)
    return -np.einsum("abc,c->ab", Y, U)


def transform_state(state: KinematicState, rescaling: ConformalRescaling,
                    metric: MetricField, gauge: str = "") -> KinematicState:
    """Move a state to the gauge omega^2 g by the component laws."""
    x = state.x
    n = metric.n
    w = rescaling.omega_value(x)
    ups = rescaling.ups_value(x, n)
    g = metric.g(x)
    U_lo = g @ state.U
    t = float(state.U @ ups)
    U_new = state.U / w
    A_new = state.A - ups + t * U_lo
    J_new = None if state.J is None else state.J / w
    kappa_new = None if state.kappa is None else (state.kappa + t) / w
    return KinematicState(x=np.array(x, dtype=float), U=U_new, A=A_new, J=J_new,
                          kappa=kappa_new, gauge=gauge or f"{state.gauge}^{rescaling.label}")


def ordinal_defect(state: KinematicState, dkappa: float, structure: MobiusStructure) -> float:
    """dkappa + (A.A + kappa^2)/2 + P_UU; vanishes along ordinal loxodromes."""
    g = structure.metric.g(state.x)
    ginv = structure.metric.g_inv(state.x)
    P = structure.rho_value(state.x)
    AA = float(state.A @ ginv @ state.A)
    PUU = float(state.U @ P @ state.U)
    return dkappa + 0.5 * (AA + state.kappa ** 2) + PUU


# ---------------------------------------------------------------------------
# jets of symbolic curves


class SymbolicCurve:
    """Exact jets of a parametric curve in a Moebius structure.

    The curve is given by coordinate expressions in the parameter; all
    derivatives (velocity through the fourth order, and the structure fields
    along the curve) are taken symbolically, so the returned jets carry no
    discretisation error.
    """

    def __init__(self, coords, structure: MobiusStructure, tvar: str = "t"):
        self.structure = structure
        self.n = structure.n
        self.tvar = tvar
        names = ("x", "y", "z")[: self.n]
        self.coords = [ex.as_expr(c) for c in coords]
        if len(self.coords) != self.n:
            raise ValueError(f"curve needs {self.n} coordinate expressions")
        subs = dict(zip(names, self.coords))

        metric = structure.metric
        self._omega = (ex.Num(1.0) if metric.omega is None
                       else ex.substitute(metric.omega, subs))
        self._ups = [ex.substitute(u, subs) for u in metric.ups_exprs()]
        self._P = [[ex.substitute(structure.rho[a][b], subs) for b in range(self.n)]
                   for a in range(self.n)]

        self._v = [ex.differentiate(c, tvar) for c in self.coords]
        vsq = ex.Num(0.0)
        for c in self._v:
            vsq = ex.add(vsq, ex.mul(c, c))
        self._speed = ex.mul(self._omega, ex.call("sqrt", vsq))

        self._U_up = [ex.div(v, self._speed) for v in self._v]
        w2 = ex.mul(self._omega, self._omega)
        self._U_lo = [ex.mul(w2, u) for u in self._U_up]

        self._cache = {}

    # -- symbolic building blocks ----------------------------------------

    def _d_s_scalar(self, f: ex.Expr) -> ex.Expr:
        return ex.div(ex.differentiate(f, self.tvar), self._speed)

    def _d_s_form(self, omega_list) -> list:
        """Arc-length covariant derivative of a lowered one-form along the
        curve: (d/dt omega_a - Gamma^c_ab v^b omega_c) / speed."""
        n = self.n
        v = self._v
        ups = self._ups
        uv = ex.Num(0.0)
        for b in range(n):
            uv = ex.add(uv, ex.mul(ups[b], v[b]))
        vw = ex.Num(0.0)
        uw = ex.Num(0.0)
        for c in range(n):
            vw = ex.add(vw, ex.mul(v[c], omega_list[c]))
            uw = ex.add(uw, ex.mul(ups[c], omega_list[c]))
        out = []
        for a in range(n):
            corr = ex.add(ex.mul(uv, omega_list[a]), ex.mul(vw, ups[a]))
            corr = ex.sub(corr, ex.mul(uw, v[a]))
            out.append(ex.div(ex.sub(ex.differentiate(omega_list[a], self.tvar), corr),
                              self._speed))
        return out

    def _delta_dot(self, a_list, b_list) -> ex.Expr:
        s = ex.Num(0.0)
        for a, b in zip(a_list, b_list):
            s = ex.add(s, ex.mul(a, b))
        return s

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    def A_exprs(self):
        return self._get("A", lambda: self._d_s_form(self._U_lo))

    def dA_exprs(self):
        return self._get("dA", lambda: self._d_s_form(self.A_exprs()))

    def J_exprs(self):
        def build():
            n = self.n
            A = self.A_exprs()
            dA = self.dA_exprs()
            w2 = ex.mul(self._omega, self._omega)
            AA = ex.div(self._delta_dot(A, A), w2)
            PUU = ex.Num(0.0)
            PU = []
            for a in range(n):
                row = ex.Num(0.0)
                for b in range(n):
                    row = ex.add(row, ex.mul(self._P[a][b], self._U_up[b]))
                PU.append(row)
                PUU = ex.add(PUU, ex.mul(row, self._U_up[a]))
            return [
                ex.sub(ex.add(dA[a], ex.mul(ex.add(AA, PUU), self._U_lo[a])), PU[a])
                for a in range(n)
            ]
        return self._get("J", build)

    def dJ_exprs(self):
        return self._get("dJ", lambda: self._d_s_form(self.J_exprs()))

    def kappa_expr(self):
        def build():
            A = self.A_exprs()
            J = self.J_exprs()
            dJ = self.dJ_exprs()
            w2 = ex.mul(self._omega, self._omega)
            AJ = ex.div(self._delta_dot(A, J), w2)
            F = [ex.add(dJ[a], ex.mul(AJ, self._U_lo[a])) for a in range(self.n)]
            # the omega^-2 in both inner products cancels in the ratio
            return ex.neg(ex.div(self._delta_dot(F, J),
                                 ex.mul(ex.Num(2.0), self._delta_dot(J, J))))
        return self._get("kappa", build)

    def dkappa_expr(self):
        return self._get("dkappa", lambda: self._d_s_scalar(self.kappa_expr()))

    # -- numeric evaluation ----------------------------------------------

    def _eval_list(self, exprs, t: float):
        env = {self.tvar: t}
        return np.array([ex.evaluate(e, env) for e in exprs])

    def speed(self, t: float) -> float:
        return ex.evaluate(self._speed, {self.tvar: t})

    def point(self, t: float) -> np.ndarray:
        return self._eval_list(self.coords, t)

    def state(self, t: float, with_kappa: bool = True,
              jerk_threshold: float = DEFAULT_JERK_THRESHOLD) -> KinematicState:
        env = {self.tvar: t}
        try:
            sp = ex.evaluate(self._speed, env)
        except ex.DomainError:
            raise SingularCurveError(f"curve is not regular at {self.tvar}={t}")
        if sp < 1e-14:
            raise SingularCurveError(f"zero velocity at {self.tvar}={t}")
        x = self._eval_list(self.coords, t)
        U = self._eval_list(self._U_up, t)
        A = self._eval_list(self.A_exprs(), t)
        J = self._eval_list(self.J_exprs(), t)
        kap = None
        if with_kappa:
            g = self.structure.metric.g(x)
            dJ = self._eval_list(self.dJ_exprs(), t)
            kap, _ = kappa_from_jet(U, A, J, dJ, g, threshold=jerk_threshold)
        return KinematicState(x=x, U=U, A=A, J=J, kappa=kap,
                              gauge=self.structure.label)

    def tower(self, t: float) -> dict:
        """Everything at once: the state plus dA, dJ, kappa, dkappa, snap.

        kappa and its rate come back as None where the jerk degenerates
        (conformal circles), everything else is still well defined there.
        """
        x = self._eval_list(self.coords, t)
        g = self.structure.metric.g(x)
        U = self._eval_list(self._U_up, t)
        A = self._eval_list(self.A_exprs(), t)
        dA = self._eval_list(self.dA_exprs(), t)
        J = self._eval_list(self.J_exprs(), t)
        dJ = self._eval_list(self.dJ_exprs(), t)
        env = {self.tvar: t}
        try:
            kap = ex.evaluate(self.kappa_expr(), env)
            dkap = ex.evaluate(self.dkappa_expr(), env)
        except ex.DomainError:
            kap = None
            dkap = None
        S = normalised_snap(U, A, J, dJ, g)
        return {
            "x": x, "U": U, "A": A, "dA": dA, "J": J, "dJ": dJ,
            "kappa": kap, "dkappa": dkap, "S": S,
            "state": KinematicState(x=x, U=U, A=A, J=J, kappa=kap,
                                    gauge=self.structure.label),
        }


def jet_from_curve(coords, structure: MobiusStructure, t: float,
                   with_kappa: bool = True,
                   jerk_threshold: float = DEFAULT_JERK_THRESHOLD) -> KinematicState:
    """Kinematic state of a symbolic parametric curve at parameter t."""
    return SymbolicCurve(coords, structure).state(t, with_kappa=with_kappa,
                                                  jerk_threshold=jerk_threshold)
