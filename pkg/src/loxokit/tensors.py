"""Dense small-tensor algebra on a single coordinate chart.

Every metric handled by the toolkit is conformally flat on its chart,
``g_ab = omega^2 * delta_ab`` (dimension 2 metrics are isothermal without
loss of generality; the constant-curvature builtins come in their
stereographic charts).  Partial derivatives of the metric are exact, taken
symbolically through the expression layer; a central-difference path is kept
as an independent oracle for tests.

The Riemann convention is R(e_c, e_d) e_b = R^a_{bcd} e_a with
Ricci_bd = R^a_{bad}.  It is pinned by the constant-curvature cross-checks
(unit sphere: scalar curvature 2 in two dimensions, Rho = g/2 in three).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex

__all__ = [
    "MetricField",
    "Weight",
    "CurvatureData",
    "SingularMetricError",
    "flat_metric",
    "sphere_metric",
    "hyperbolic_metric",
    "cylinder_metric",
    "isothermal_metric",
    "christoffel",
    "christoffel_derivative",
    "curvature",
    "epsilon_upper",
    "lower_index",
    "raise_index",
    "inner",
    "norm",
]


class SingularMetricError(ValueError):
    pass


@dataclass(frozen=True)
class Weight:
    """Conformal weight carried as metadata on reported scalars.

    A weight-w scalar picks up a factor omega^w under g -> omega^2 g;
    weights add under tensor product.
    """

    w: int

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(self.w + other.w)

    def rescale_factor(self, omega_value: float) -> float:
        return float(omega_value) ** self.w


class MetricField:
    """A metric omega^2 * delta on an n-dimensional chart (n in {2, 3})."""

    def __init__(self, n: int, kind: str, omega: ex.Expr | None, K: float | None = None,
                 label: str = ""):
        if n not in (2, 3):
            raise ValueError("chart dimension must be 2 or 3")
        self.n = n
        self.kind = kind
        self.omega = omega
        self.K = K
        self.label = label or kind
        self._names = ("x", "y", "z")[:n]
        self._domega = None
        self._d2omega = None
        self._ups = None

    # -- symbolic derivative caches -------------------------------------

    def _omega_expr(self) -> ex.Expr:
        return ex.Num(1.0) if self.omega is None else self.omega

    def domega_exprs(self):
        if self._domega is None:
            w = self._omega_expr()
            self._domega = [ex.differentiate(w, v) for v in self._names]
        return self._domega

    def d2omega_exprs(self):
        if self._d2omega is None:
            dw = self.domega_exprs()
            self._d2omega = [
                [ex.differentiate(dw[a], v) for v in self._names] for a in range(self.n)
            ]
        return self._d2omega

    def ups_exprs(self):
        """Components of grad log(omega); zero expressions for flat charts."""
        if self._ups is None:
            if self.omega is None:
                self._ups = [ex.Num(0.0)] * self.n
            else:
                w = self._omega_expr()
                self._ups = [ex.div(d, w) for d in self.domega_exprs()]
        return self._ups

    # -- pointwise evaluators -------------------------------------------

    def omega_value(self, point) -> float:
        if self.omega is None:
            return 1.0
        return ex.evaluate(self.omega, point)

    def g(self, point) -> np.ndarray:
        w = self.omega_value(point)
        if w <= 0.0:
            raise SingularMetricError(f"conformal factor {w} is not positive at {point}")
        return (w * w) * np.eye(self.n)

    def g_inv(self, point) -> np.ndarray:
        w = self.omega_value(point)
        if w <= 0.0:
            raise SingularMetricError(f"conformal factor {w} is not positive at {point}")
        return np.eye(self.n) / (w * w)

    def sqrt_det(self, point) -> float:
        return self.omega_value(point) ** self.n

    def dg(self, point) -> np.ndarray:
        """Exact coordinate derivative dg[c, a, b] = d_c g_ab."""
        n = self.n
        out = np.zeros((n, n, n))
        if self.omega is None:
            return out
        w = ex.evaluate(self.omega, point)
        dw = [ex.evaluate(d, point) for d in self.domega_exprs()]
        eye = np.eye(n)
        for c in range(n):
            out[c] = 2.0 * w * dw[c] * eye
        return out

    def d2g(self, point) -> np.ndarray:
        """Exact second derivative d2g[d, c, a, b] = d_d d_c g_ab."""
        n = self.n
        out = np.zeros((n, n, n, n))
        if self.omega is None:
            return out
        w = ex.evaluate(self.omega, point)
        dw = [ex.evaluate(e, point) for e in self.domega_exprs()]
        d2w = [[ex.evaluate(e, point) for e in row] for row in self.d2omega_exprs()]
        eye = np.eye(n)
        for d in range(n):
            for c in range(n):
                out[d, c] = 2.0 * (dw[d] * dw[c] + w * d2w[d][c]) * eye
        return out

    def dg_fd(self, point, h: float = 1e-5) -> np.ndarray:
        """Central-difference oracle for dg; independent of the symbolic path."""
        n = self.n
        p = np.asarray(point, dtype=float)
        out = np.zeros((n, n, n))
        for c in range(n):
            pp = p.copy()
            pm = p.copy()
            pp[c] += h
            pm[c] -= h
            out[c] = (self.g(pp) - self.g(pm)) / (2.0 * h)
        return out

    def __repr__(self):
        return f"MetricField(n={self.n}, kind={self.kind!r})"


def flat_metric(n: int = 2) -> MetricField:
    return MetricField(n, "flat", None, label="flat")


def _r_squared(n: int) -> ex.Expr:
    r2 = ex.pow_(ex.var("x"), ex.num(2))
    r2 = ex.add(r2, ex.pow_(ex.var("y"), ex.num(2)))
    if n == 3:
        r2 = ex.add(r2, ex.pow_(ex.var("z"), ex.num(2)))
    return r2


def sphere_metric(K: float = 1.0, n: int = 2) -> MetricField:
    """Round sphere of curvature K > 0 in its stereographic chart."""
    if K <= 0:
        raise ValueError("sphere curvature must be positive")
    a2 = 1.0 / K
    omega = ex.div(ex.num(2.0 * a2), ex.add(ex.num(a2), _r_squared(n)))
    return MetricField(n, "sphere", omega, K=K, label=f"sphere(K={K:g})")


def hyperbolic_metric(K: float = 1.0, n: int = 2) -> MetricField:
    """Hyperbolic space of curvature -K (K > 0) in its Poincare-ball chart."""
    if K <= 0:
        raise ValueError("hyperbolic curvature parameter must be positive")
    a2 = 1.0 / K
    omega = ex.div(ex.num(2.0 * a2), ex.sub(ex.num(a2), _r_squared(n)))
    return MetricField(n, "hyperbolic", omega, K=K, label=f"hyperbolic(K={K:g})")


def cylinder_metric() -> MetricField:
    """Flat chart (log radius, angle); the cylinder-gauge Rho is attached by
    the Moebius layer."""
    return MetricField(2, "cylinder", None, label="cylinder")


def isothermal_metric(omega, n: int = 2) -> MetricField:
    e = ex.as_expr(omega)
    return MetricField(n, "isothermal", e, label=f"isothermal({ex.to_text(e)})")


# ---------------------------------------------------------------------------
# connection and curvature


def christoffel(metric: MetricField, point) -> np.ndarray:
    """Levi-Civita symbols gamma[a, b, c] = Gamma^a_{bc} from g and dg."""
    n = metric.n
    g = metric.g(point)
    ginv = metric.g_inv(point)
    dg = metric.dg(point)
    if abs(np.linalg.det(g)) < 1e-300:
        raise SingularMetricError(f"metric is singular at {point}")
    gamma = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                acc = 0.0
                for d in range(n):
                    acc += ginv[a, d] * (dg[b, d, c] + dg[c, b, d] - dg[d, b, c])
                gamma[a, b, c] = 0.5 * acc
    return gamma


def christoffel_derivative(metric: MetricField, point) -> np.ndarray:
    """dgamma[e, a, b, c] = d_e Gamma^a_{bc}, exact through d2g."""
    n = metric.n
    ginv = metric.g_inv(point)
    dg = metric.dg(point)
    d2g = metric.d2g(point)
    dginv = np.zeros((n, n, n))
    for e in range(n):
        dginv[e] = -ginv @ dg[e] @ ginv
    out = np.zeros((n, n, n, n))
    for e in range(n):
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    acc = 0.0
                    for d in range(n):
                        t = dg[b, d, c] + dg[c, b, d] - dg[d, b, c]
                        dt = d2g[e, b, d, c] + d2g[e, c, b, d] - d2g[e, d, b, c]
                        acc += dginv[e, a, d] * t + ginv[a, d] * dt
                    out[e, a, b, c] = 0.5 * acc
    return out


@dataclass
class CurvatureData:
    gamma: np.ndarray            # Gamma^a_{bc}
    riemann: np.ndarray          # R^a_{bcd}
    riemann_lowered: np.ndarray  # R_{abcd}
    ricci: np.ndarray
    scalar: float


def curvature(metric: MetricField, point) -> CurvatureData:
    n = metric.n
    g = metric.g(point)
    ginv = metric.g_inv(point)
    gamma = christoffel(metric, point)
    dgamma = christoffel_derivative(metric, point)
    riem = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    acc = dgamma[c, a, d, b] - dgamma[d, a, c, b]
                    for e in range(n):
                        acc += gamma[a, c, e] * gamma[e, d, b] - gamma[a, d, e] * gamma[e, c, b]
                    riem[a, b, c, d] = acc
    ricci = np.einsum("abad->bd", riem)
    scalar = float(np.einsum("bd,bd->", ginv, ricci))
    lowered = np.einsum("ae,ebcd->abcd", g, riem)
    return CurvatureData(gamma=gamma, riemann=riem, riemann_lowered=lowered,
                         ricci=ricci, scalar=scalar)


def epsilon_upper(metric: MetricField, point) -> np.ndarray:
    """Oriented area bivector eps^{bc} with eps^{12} = 1/sqrt(det g); the
    chart orientation is the coordinate orientation."""
    if metric.n != 2:
        raise ValueError("epsilon_upper is a two-dimensional operation")
    e = 1.0 / metric.sqrt_det(point)
    return np.array([[0.0, e], [-e, 0.0]])


# ---------------------------------------------------------------------------
# index gymnastics on per-point values


def lower_index(vec, g) -> np.ndarray:
    return np.asarray(g) @ np.asarray(vec, dtype=float)


def raise_index(form, ginv) -> np.ndarray:
    return np.asarray(ginv) @ np.asarray(form, dtype=float)


def inner(a, b, g) -> float:
    """g(a, b) for two vectors (pass g_inv for two lowered forms)."""
    return float(np.asarray(a, dtype=float) @ np.asarray(g) @ np.asarray(b, dtype=float))


def norm(a, g) -> float:
    v = inner(a, a, g)
    return math.sqrt(v) if v > 0.0 else 0.0
