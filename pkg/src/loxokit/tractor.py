"""Adjoint tractor calculus on a chart.

A tractor has four slots (sigma_b; mu_bc, nu; rho_b) written in a chosen
gauge.  ``transform`` is the bare mixing law of the slots under a conformal
rescaling; genuinely weighted sections additionally pick up per-slot powers
of omega (the slots sit in weighted bundles), which ``scale_by_weight``
supplies.  The velocity lift of a curve with non-degenerate jerk is a
weight -1 section, which is why its equivariance check pairs ``transform``
with ``scale_by_weight``.

The curve derivative takes the caller's component derivatives (the material
rates of sigma, mu, nu, rho along the curve) and applies the U-contracted
connection; for the velocity lift those rates follow from the evolution
identities of the tower, packaged in ``lift_with_derivative``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .flatmodel import KillingCoefficients
from .kinematics import DegenerateJerkError, KinematicState
from .mobius import ConformalRescaling, MobiusStructure
from .tensors import MetricField, christoffel, epsilon_upper

__all__ = [
    "AdjointTractor",
    "TractorField",
    "transform",
    "transform_weighted",
    "scale_by_weight",
    "connection_apply",
    "curve_derivative",
    "lift_velocity",
    "lift_with_derivative",
    "lift_curve_derivative",
    "null_residual",
    "discriminant",
    "killing_split",
    "killing_split_field",
    "bundle_b_residual",
    "bundle_b_sections",
    "acceleration_rate_from_jerk",
    "jerk_rate_from_kappa",
]


@dataclass
class AdjointTractor:
    sigma: np.ndarray
    mu: np.ndarray          # antisymmetric (n, n)
    nu: float
    rho: np.ndarray
    gauge: str = ""
    weight: int = 0

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)
        self.nu = float(self.nu)
        self.rho = np.asarray(self.rho, dtype=float)
        if not np.allclose(self.mu, -self.mu.T, atol=0.0):
            raise ValueError("mu must be exactly antisymmetric")

    @property
    def n(self) -> int:
        return len(self.sigma)

    def as_array(self) -> np.ndarray:
        n = self.n
        mu_flat = [self.mu[a, b] for a in range(n) for b in range(a + 1, n)]
        return np.concatenate([self.sigma, mu_flat, [self.nu], self.rho])

    def scaled(self, factor: float) -> "AdjointTractor":
        return AdjointTractor(factor * self.sigma, factor * self.mu,
                              factor * self.nu, factor * self.rho,
                              gauge=self.gauge, weight=self.weight)

    def to_json(self) -> dict:
        if self.n != 2:
            raise ValueError("the mu12 wire format is two-dimensional")
        return {
            "sigma": [float(v) for v in self.sigma],
            "mu12": float(self.mu[0, 1]),
            "nu": self.nu,
            "rho": [float(v) for v in self.rho],
            "gauge": self.gauge,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AdjointTractor":
        m = float(obj["mu12"])
        return cls(obj["sigma"], [[0.0, m], [-m, 0.0]], obj["nu"], obj["rho"],
                   gauge=obj.get("gauge", ""))

    def add(self, other: "AdjointTractor") -> "AdjointTractor":
        return AdjointTractor(self.sigma + other.sigma, self.mu + other.mu,
                              self.nu + other.nu, self.rho + other.rho,
                              gauge=self.gauge, weight=self.weight)

    def sub(self, other: "AdjointTractor") -> "AdjointTractor":
        return self.add(other.scaled(-1.0))


def _mu_from_pair(u, w) -> np.ndarray:
    """2 u_[b w_c] as a matrix."""
    return np.outer(u, w) - np.outer(w, u)


def transform(T: AdjointTractor, rescaling: ConformalRescaling, metric: MetricField,
              point, gauge: str = "") -> AdjointTractor:
    """Slot mixing law under g -> omega^2 g (component rule, applied verbatim)."""
    n = metric.n
    if T.gauge and metric.label and T.gauge not in (metric.label,):
        raise ValueError(f"tractor gauge {T.gauge!r} does not match metric {metric.label!r}")
    ups = rescaling.ups_value(point, n)
    ginv = metric.g_inv(point)
    ups_up = ginv @ ups
    sigma = T.sigma.copy()
    mu = T.mu + _mu_from_pair(ups, T.sigma)
    nu = T.nu + float(ups_up @ T.sigma)
    rho = (T.rho + ups_up @ T.mu - T.nu * ups
           - float(ups_up @ T.sigma) * ups + 0.5 * float(ups_up @ ups) * T.sigma)
    if not gauge:
        gauge = f"{T.gauge}^{rescaling.label}" if T.gauge else ""
    return AdjointTractor(sigma, mu, nu, rho, gauge=gauge, weight=T.weight)


def scale_by_weight(T: AdjointTractor, omega_value: float) -> AdjointTractor:
    """Per-slot weight factors of a section of the weight-w adjoint bundle:
    (omega^(2+w), omega^(2+w), omega^w, omega^w) on (sigma, mu, nu, rho)."""
    w = T.weight
    top = omega_value ** (2 + w)
    bot = omega_value ** w
    return AdjointTractor(top * T.sigma, top * T.mu, bot * T.nu, bot * T.rho,
                          gauge=T.gauge, weight=T.weight)


def transform_weighted(T: AdjointTractor, rescaling: ConformalRescaling,
                       metric: MetricField, point, gauge: str = "") -> AdjointTractor:
    """Full transition function: the slot mixing law combined with the
    per-slot weight factors.  Unlike the bare mixing law on raw component
    vectors, these compose: rescaling by omega1 and then omega2 agrees with
    rescaling by omega1*omega2, and sections built from geometric data (the
    velocity lift, the splitting of a Killing field) are equivariant."""
    return scale_by_weight(transform(T, rescaling, metric, point, gauge=gauge),
                           rescaling.omega_value(point))


# ---------------------------------------------------------------------------
# connection and curve derivative


@dataclass
class TractorField:
    """Tractor with expression-valued components (coordinate derivatives are
    then exact for the connection)."""

    sigma: list
    mu: list                 # n x n nested list of Expr, antisymmetric
    nu: ex.Expr
    rho: list
    gauge: str = ""

    def value(self, point) -> AdjointTractor:
        n = len(self.sigma)
        return AdjointTractor(
            [ex.evaluate(e, point) for e in self.sigma],
            [[ex.evaluate(self.mu[a][b], point) for b in range(n)] for a in range(n)],
            ex.evaluate(self.nu, point),
            [ex.evaluate(e, point) for e in self.rho],
            gauge=self.gauge,
        )


def connection_apply(field: TractorField, structure: MobiusStructure, point):
    """nabla_a T for an expression-valued tractor field; returns one tractor
    per chart direction a."""
    n = structure.n
    names = ("x", "y", "z")[:n]
    g = structure.metric.g(point)
    ginv = structure.metric.g_inv(point)
    gamma = christoffel(structure.metric, point)
    P = structure.rho_value(point)

    sig = np.array([ex.evaluate(e, point) for e in field.sigma])
    mu = np.array([[ex.evaluate(field.mu[a][b], point) for b in range(n)] for a in range(n)])
    nu = ex.evaluate(field.nu, point)
    rho = np.array([ex.evaluate(e, point) for e in field.rho])

    dsig = np.array([[ex.evaluate(ex.differentiate(field.sigma[b], names[a]), point)
                      for b in range(n)] for a in range(n)])
    dmu = np.array([[[ex.evaluate(ex.differentiate(field.mu[b][c], names[a]), point)
                      for c in range(n)] for b in range(n)] for a in range(n)])
    dnu = np.array([ex.evaluate(ex.differentiate(field.nu, names[a]), point)
                    for a in range(n)])
    drho = np.array([[ex.evaluate(ex.differentiate(field.rho[b], names[a]), point)
                      for b in range(n)] for a in range(n)])

    P_mixed = P @ ginv  # P_a{}^b
    out = []
    for a in range(n):
        cov_sig = dsig[a] - np.array([sum(gamma[c, a, b] * sig[c] for c in range(n))
                                      for b in range(n)])
        cov_mu = np.zeros((n, n))
        for b in range(n):
            for c in range(n):
                acc = dmu[a, b, c]
                for d in range(n):
                    acc -= gamma[d, a, b] * mu[d, c] + gamma[d, a, c] * mu[b, d]
                cov_mu[b, c] = acc
        cov_rho = drho[a] - np.array([sum(gamma[c, a, b] * rho[c] for c in range(n))
                                      for b in range(n)])

        row_sigma = cov_sig - mu[a] - nu * g[a]
        row_mu = cov_mu - (np.outer(g[a], rho) - np.outer(rho, g[a])) \
            + (np.outer(P[a], sig) - np.outer(sig, P[a]))
        row_nu = dnu[a] + rho[a] + float(P_mixed[a] @ sig)
        row_rho = cov_rho - mu @ P_mixed[a] - P[a] * nu
        out.append(AdjointTractor(row_sigma, row_mu, row_nu, row_rho, gauge=field.gauge))
    return out


def curve_derivative(T: AdjointTractor, dT, structure: MobiusStructure,
                     state: KinematicState) -> AdjointTractor:
    """U-contracted tractor derivative along a curve.

    dT = (dsigma, dmu, dnu, drho) are the material rates of the component
    tensors along the curve (covariant, arc-length).
    """
    n = structure.n
    g = structure.metric.g(state.x)
    ginv = structure.metric.g_inv(state.x)
    P = structure.rho_value(state.x)
    U = state.U
    U_lo = g @ U
    dsigma, dmu, dnu, drho = dT
    dsigma = np.asarray(dsigma, dtype=float)
    dmu = np.asarray(dmu, dtype=float)
    drho = np.asarray(drho, dtype=float)

    PU = P.T @ U            # U^a P_ab
    P_mixed_U = ginv @ PU   # U^a P_a{}^b

    row_sigma = dsigma - U @ T.mu - T.nu * U_lo
    row_mu = dmu - _mu_from_pair(U_lo, T.rho) + _mu_from_pair(PU, T.sigma)
    row_nu = float(dnu) + float(U @ T.rho) + float(P_mixed_U @ T.sigma)
    row_rho = drho - T.mu @ P_mixed_U - PU * T.nu
    return AdjointTractor(row_sigma, row_mu, row_nu, row_rho, gauge=T.gauge, weight=T.weight)


# ---------------------------------------------------------------------------
# velocity lift


def lift_velocity(state: KinematicState, metric: MetricField) -> AdjointTractor:
    """The canonical weight -1 lift (U_b; 2U_[b A_c], kappa;
    J_b + (A.A - kappa^2)/2 U_b + kappa A_b)."""
    if state.J is None or state.kappa is None:
        raise DegenerateJerkError("velocity lift needs J and kappa (non-degenerate jerk)")
    g = metric.g(state.x)
    ginv = metric.g_inv(state.x)
    U_lo = g @ state.U
    AA = float(state.A @ ginv @ state.A)
    sigma = U_lo
    mu = _mu_from_pair(U_lo, state.A)
    nu = state.kappa
    rho = state.J + 0.5 * (AA - state.kappa ** 2) * U_lo + state.kappa * state.A
    return AdjointTractor(sigma, mu, nu, rho, gauge=state.gauge, weight=-1)


def null_residual(T: AdjointTractor, metric: MetricField, point) -> float:
    """4 sigma^b rho_b - mu^bc mu_bc + 2 nu^2 (zero on velocity lifts)."""
    ginv = metric.g_inv(point)
    s = float((ginv @ T.sigma) @ T.rho)
    mu_up = ginv @ T.mu @ ginv
    mumu = float(np.sum(mu_up * T.mu))
    return 4.0 * s - mumu + 2.0 * T.nu ** 2


def acceleration_rate_from_jerk(state: KinematicState, structure: MobiusStructure) -> np.ndarray:
    """dA along the curve, solved from the jerk definition with the state's J."""
    g = structure.metric.g(state.x)
    ginv = structure.metric.g_inv(state.x)
    P = structure.rho_value(state.x)
    U_lo = g @ state.U
    AA = float(state.A @ ginv @ state.A)
    PUU = float(state.U @ P @ state.U)
    return state.J - (AA + PUU) * U_lo + P @ state.U


def jerk_rate_from_kappa(state: KinematicState, structure: MobiusStructure) -> np.ndarray:
    """dJ along the curve from the defining equation of kappa."""
    g = structure.metric.g(state.x)
    ginv = structure.metric.g_inv(state.x)
    AJ = float(state.A @ ginv @ state.J)
    return -AJ * (g @ state.U) - 2.0 * state.kappa * state.J


def lift_with_derivative(state: KinematicState, structure: MobiusStructure,
                         dkappa: float):
    """The lift and the material rates of its components, with dA and dJ
    substituted from the tower identities and dkappa left free."""
    metric = structure.metric
    g = metric.g(state.x)
    ginv = metric.g_inv(state.x)
    T = lift_velocity(state, metric)
    U_lo = g @ state.U
    dA = acceleration_rate_from_jerk(state, structure)
    dJ = jerk_rate_from_kappa(state, structure)
    dsigma = state.A.copy()
    dmu = _mu_from_pair(U_lo, dA)
    dnu = dkappa
    dAA = 2.0 * float(state.A @ ginv @ dA)
    dkap2 = 2.0 * state.kappa * dkappa
    drho = dJ + 0.5 * (dAA - dkap2) * U_lo + 0.5 * (float(state.A @ ginv @ state.A)
                                                    - state.kappa ** 2) * state.A \
        + dkappa * state.A + state.kappa * dA
    return T, (dsigma, dmu, dnu, drho)


def lift_curve_derivative(state: KinematicState, structure: MobiusStructure,
                          dkappa: float) -> AdjointTractor:
    T, dT = lift_with_derivative(state, structure, dkappa)
    return curve_derivative(T, dT, structure, state)


# ---------------------------------------------------------------------------
# discriminant and the flat-model splitting


def discriminant(T: AdjointTractor, metric: MetricField, point) -> complex:
    """Complex discriminant of a tractor in two dimensions:
    2(4 sigma.rho - mu.mu + 2 nu^2) + 4i eps^bc (nu mu_bc - 2 sigma_[b rho_c])."""
    if metric.n != 2:
        raise ValueError("the discriminant is a two-dimensional invariant")
    ginv = metric.g_inv(point)
    eps = epsilon_upper(metric, point)
    s = float((ginv @ T.sigma) @ T.rho)
    mu_up = ginv @ T.mu @ ginv
    mumu = float(np.sum(mu_up * T.mu))
    re = 2.0 * (4.0 * s - mumu + 2.0 * T.nu ** 2)
    X = T.nu * T.mu - _mu_from_pair(T.sigma, T.rho)
    im = 4.0 * float(np.sum(eps * X))
    return complex(re, im)


def killing_split(k: KillingCoefficients, point) -> AdjointTractor:
    """Parallel adjoint-tractor section of a flat-gauge conformal Killing
    field (the splitting that inverts the projection to vector fields)."""
    x, y = float(point[0]), float(point[1])
    s1 = k.u + k.lam * x - k.F * y + 0.5 * k.P * (x * x - y * y) - k.Q * x * y
    s2 = k.v + k.lam * y + k.F * x + k.P * x * y + 0.5 * k.Q * (x * x - y * y)
    mu12 = k.F + k.P * y + k.Q * x
    nu = k.lam + k.P * x - k.Q * y
    return AdjointTractor([s1, s2], [[0.0, mu12], [-mu12, 0.0]], nu, [-k.P, k.Q],
                          gauge="flat")


def killing_split_field(k: KillingCoefficients) -> TractorField:
    X, Y = ex.var("x"), ex.var("y")
    half = ex.Num(0.5)
    xx_minus_yy = ex.sub(ex.mul(X, X), ex.mul(Y, Y))
    s1 = ex.add(
        ex.add(ex.num(k.u), ex.sub(ex.mul(ex.num(k.lam), X), ex.mul(ex.num(k.F), Y))),
        ex.sub(ex.mul(ex.mul(half, ex.num(k.P)), xx_minus_yy),
               ex.mul(ex.num(k.Q), ex.mul(X, Y))),
    )
    s2 = ex.add(
        ex.add(ex.num(k.v), ex.add(ex.mul(ex.num(k.lam), Y), ex.mul(ex.num(k.F), X))),
        ex.add(ex.mul(ex.num(k.P), ex.mul(X, Y)),
               ex.mul(ex.mul(half, ex.num(k.Q)), xx_minus_yy)),
    )
    mu12 = ex.add(ex.num(k.F), ex.add(ex.mul(ex.num(k.P), Y), ex.mul(ex.num(k.Q), X)))
    nu = ex.add(ex.num(k.lam), ex.sub(ex.mul(ex.num(k.P), X), ex.mul(ex.num(k.Q), Y)))
    zero = ex.Num(0.0)
    return TractorField(
        sigma=[s1, s2],
        mu=[[zero, mu12], [ex.neg(mu12), zero]],
        nu=nu,
        rho=[ex.num(-k.P), ex.num(k.Q)],
        gauge="flat",
    )


# ---------------------------------------------------------------------------
# the rank-3 subbundle spanned by the curve


def bundle_b_sections(state: KinematicState, metric: MetricField):
    """Spanning sections (0,0,0,U_b), (0,0,1,A_b), (U_b, 2U_[bA_c], 0, 0)."""
    n = metric.n
    g = metric.g(state.x)
    U_lo = g @ state.U
    zero_mu = np.zeros((n, n))
    phi1 = AdjointTractor(np.zeros(n), zero_mu, 0.0, U_lo, gauge=state.gauge)
    phi2 = AdjointTractor(np.zeros(n), zero_mu, 1.0, state.A, gauge=state.gauge)
    phi3 = AdjointTractor(U_lo, _mu_from_pair(U_lo, state.A), 0.0, np.zeros(n),
                          gauge=state.gauge)
    return phi1, phi2, phi3


def bundle_b_residual(state: KinematicState, structure: MobiusStructure) -> float:
    """Norm of the part of d(span sections) falling outside the rank-3
    subbundle; equals |J| in the gauge metric, so it vanishes exactly on
    conformal circles."""
    metric = structure.metric
    n = metric.n
    g = metric.g(state.x)
    ginv = metric.g_inv(state.x)
    phi1, phi2, phi3 = bundle_b_sections(state, metric)
    dA = acceleration_rate_from_jerk(state, structure)
    dT = (np.zeros(n), np.zeros((n, n)), 0.0, dA)
    D = curve_derivative(phi2, dT, structure, state)

    # peel off the B components: phi3 carries the sigma slot, phi2 the nu
    # slot, phi1 the U-parallel part of rho; what is left lies in the
    # complement (sigma and rho orthogonal to U, plus the mu slot)
    gamma3 = float(state.U @ D.sigma)
    D = D.sub(phi3.scaled(gamma3))
    beta2 = D.nu
    D = D.sub(phi2.scaled(beta2))
    alpha1 = float(state.U @ D.rho)
    D = D.sub(phi1.scaled(alpha1))

    sig2 = float(D.sigma @ ginv @ D.sigma)
    mu_up = ginv @ D.mu @ ginv
    mumu = float(np.sum(mu_up * D.mu))
    rho2 = float(D.rho @ ginv @ D.rho)
    return float(np.sqrt(sig2 + 0.5 * mumu + rho2))
