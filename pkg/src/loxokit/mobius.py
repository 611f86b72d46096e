"""Moebius structures: a metric paired with a Rho tensor.

A structure is a conformally flat chart metric together with symmetric Rho
expressions.  The canonical structure of an isothermal metric transports
Rho = 0 from the flat reference gauge through the Rho transformation law;
for the constant-curvature builtins this reproduces (K/2) g, and in three
dimensions it coincides with the Schouten tensor of the metric (the
curvature-based ``schouten`` operation below is kept as the independent
route and the two are tied together by tests).

The cylinder gauge is the flat (log radius, angle) chart carrying the
constant Rho diag(-1/2, +1/2), i.e. the flat-model structure transported
into the log chart.
"""

from __future__ import annotations

import numpy as np

from . import expr as ex
from . import tensors
from ._kernel import PackedStructure
from .tensors import MetricField, christoffel

__all__ = [
    "ConformalRescaling",
    "MobiusStructure",
    "flat_structure",
    "structure_for_metric",
    "rescale_structure",
    "rho_transform",
    "schouten",
    "cotton_york",
    "mobius_trace_defect",
    "structure_from_config",
    "metric_from_config",
]

_NAMES = ("x", "y", "z")


class ConformalRescaling:
    """A positive factor omega with its logarithmic gradient Upsilon."""

    def __init__(self, omega, label: str = ""):
        self.omega = ex.as_expr(omega)
        self.label = label or ex.to_text(self.omega)
        self._ups = None
        self._dups = None

    def ups_exprs(self, n: int):
        if self._ups is None or len(self._ups) < n:
            self._ups = [
                ex.div(ex.differentiate(self.omega, v), self.omega) for v in _NAMES[:n]
            ]
        return self._ups[:n]

    def dups_exprs(self, n: int):
        """dups[a][b] = d_a Upsilon_b (coordinate partials)."""
        if self._dups is None or len(self._dups) < n:
            ups = self.ups_exprs(n)
            self._dups = [
                [ex.differentiate(ups[b], _NAMES[a]) for b in range(n)] for a in range(n)
            ]
        return self._dups

    def omega_value(self, point) -> float:
        w = ex.evaluate(self.omega, point)
        if w <= 0.0:
            raise ValueError(f"rescaling factor {w} is not positive at {point}")
        return w

    def ups_value(self, point, n: int | None = None) -> np.ndarray:
        n = n if n is not None else _point_dim(point)
        return np.array([ex.evaluate(e, point) for e in self.ups_exprs(n)])

    def dups_value(self, point, n: int | None = None) -> np.ndarray:
        n = n if n is not None else _point_dim(point)
        rows = self.dups_exprs(n)
        return np.array([[ex.evaluate(rows[a][b], point) for b in range(n)] for a in range(n)])

    def compose(self, other: "ConformalRescaling") -> "ConformalRescaling":
        """Rescaling by self followed by other, i.e. the factor product."""
        return ConformalRescaling(ex.mul(self.omega, other.omega),
                                  label=f"{self.label}*{other.label}")

    def inverse(self) -> "ConformalRescaling":
        return ConformalRescaling(ex.div(ex.Num(1.0), self.omega), label=f"1/({self.label})")

    def __repr__(self):
        return f"ConformalRescaling({ex.to_text(self.omega)})"


def _point_dim(point) -> int:
    try:
        return len(point)
    except TypeError:
        return 2


class MobiusStructure:
    def __init__(self, metric: MetricField, rho, provenance: str, label: str = ""):
        self.metric = metric
        self.n = metric.n
        if rho is None:
            rho = [[ex.Num(0.0)] * self.n for _ in range(self.n)]
        self.rho = rho
        self.provenance = provenance
        self.label = label or f"{metric.label}/{provenance}"
        self._drho = None
        self._packed = {}

    def rho_exprs(self):
        return self.rho

    def rho_value(self, point) -> np.ndarray:
        n = self.n
        return np.array([[ex.evaluate(self.rho[a][b], point) for b in range(n)] for a in range(n)])

    def drho_exprs(self):
        if self._drho is None:
            n = self.n
            self._drho = [
                [[ex.differentiate(self.rho[a][b], _NAMES[c]) for b in range(n)] for a in range(n)]
                for c in range(n)
            ]
        return self._drho

    def drho_value(self, point) -> np.ndarray:
        """drho[c, a, b] = d_c P_ab."""
        n = self.n
        d = self.drho_exprs()
        return np.array(
            [[[ex.evaluate(d[c][a][b], point) for b in range(n)] for a in range(n)]
             for c in range(n)]
        )

    def packed(self, with_drho: bool = False) -> PackedStructure:
        key = bool(with_drho)
        if key not in self._packed:
            self._packed[key] = PackedStructure(self.n, self.metric.omega, self.rho, key)
        return self._packed[key]

    def __repr__(self):
        return f"MobiusStructure({self.label})"


# ---------------------------------------------------------------------------
# construction


def _transport_rho_exprs(rho_old, metric_old: MetricField, rescaling: ConformalRescaling):
    """Symbolic Rho transformation law.

    P_ab - nabla_a Ups_b + Ups_a Ups_b - (1/2) Ups.Ups g_ab, with nabla the
    Levi-Civita connection of the pre-rescaling metric.  On an isothermal
    chart the trace term's omega factors cancel, leaving plain delta sums.
    """
    n = metric_old.n
    ups = rescaling.ups_exprs(n)
    dups = rescaling.dups_exprs(n)
    v = metric_old.ups_exprs()  # grad log of the old conformal factor

    vdotU = ex.Num(0.0)
    UdotU = ex.Num(0.0)
    for c in range(n):
        vdotU = ex.add(vdotU, ex.mul(v[c], ups[c]))
        UdotU = ex.add(UdotU, ex.mul(ups[c], ups[c]))

    out = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            # nabla_a Ups_b = d_a Ups_b - (Ups_a v_b + Ups_b v_a - delta_ab v.Ups)
            nab = dups[a][b]
            nab = ex.sub(nab, ex.add(ex.mul(ups[a], v[b]), ex.mul(ups[b], v[a])))
            if a == b:
                nab = ex.add(nab, vdotU)
            term = ex.sub(rho_old[a][b], nab)
            term = ex.add(term, ex.mul(ups[a], ups[b]))
            if a == b:
                term = ex.sub(term, ex.mul(ex.Num(0.5), UdotU))
            out[a][b] = term
    return out


_CYLINDER_RHO = [[ex.Num(-0.5), ex.Num(0.0)], [ex.Num(0.0), ex.Num(0.5)]]


def flat_structure(n: int = 2) -> MobiusStructure:
    return MobiusStructure(tensors.flat_metric(n), None, "flat-model", label="flat")


def structure_for_metric(metric: MetricField, rho="flat-model") -> MobiusStructure:
    """Attach a Rho field to a metric.

    rho: "flat-model" (transport of zero from the flat reference),
         "constant-curvature" ((K/2) g for the curvature builtins),
         "schouten" (dimension 3),
         or a mapping of component expressions {"P11": ..., "P12": ..., ...}.
    """
    n = metric.n
    if isinstance(rho, str) and rho == "flat-model":
        if metric.kind == "cylinder":
            return MobiusStructure(metric, _CYLINDER_RHO, "flat-model-transform")
        if metric.omega is None:
            return MobiusStructure(metric, None, "flat-model-transform")
        resc = ConformalRescaling(metric.omega)
        zero = [[ex.Num(0.0)] * n for _ in range(n)]
        exprs = _transport_rho_exprs(zero, tensors.flat_metric(n), resc)
        return MobiusStructure(metric, exprs, "flat-model-transform")
    if isinstance(rho, str) and rho == "constant-curvature":
        if metric.kind == "sphere":
            k = metric.K
        elif metric.kind == "hyperbolic":
            k = -metric.K
        elif metric.kind == "flat":
            k = 0.0
        else:
            raise ValueError("constant-curvature Rho needs a flat/sphere/hyperbolic builtin")
        w = metric.omega if metric.omega is not None else ex.Num(1.0)
        g_scale = ex.mul(ex.Num(0.5 * k), ex.mul(w, w))
        exprs = [
            [g_scale if a == b else ex.Num(0.0) for b in range(n)] for a in range(n)
        ]
        return MobiusStructure(metric, exprs, "constant-curvature")
    if isinstance(rho, str) and rho == "schouten":
        if n != 3:
            raise ValueError("the Schouten formula fixes Rho only in dimension 3")
        if metric.omega is None:
            return MobiusStructure(metric, None, "schouten")
        resc = ConformalRescaling(metric.omega)
        zero = [[ex.Num(0.0)] * n for _ in range(n)]
        exprs = _transport_rho_exprs(zero, tensors.flat_metric(n), resc)
        return MobiusStructure(metric, exprs, "schouten")
    if isinstance(rho, dict):
        exprs = _rho_exprs_from_mapping(rho, n)
        return MobiusStructure(metric, exprs, "user")
    if isinstance(rho, (list, tuple)):
        exprs = [[ex.as_expr(rho[a][b]) for b in range(n)] for a in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                if exprs[a][b] != exprs[b][a]:
                    raise ValueError("user Rho must be symmetric")
        return MobiusStructure(metric, exprs, "user")
    raise ValueError(f"unrecognised Rho specification {rho!r}")


def _rho_exprs_from_mapping(mapping, n: int):
    exprs = [[ex.Num(0.0)] * n for _ in range(n)]
    for key, value in mapping.items():
        if not (len(key) == 3 and key[0] == "P" and key[1:].isdigit()):
            raise ValueError(f"bad Rho component name {key!r} (expected P11, P12, ...)")
        a, b = int(key[1]) - 1, int(key[2]) - 1
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"Rho component {key!r} out of range for dimension {n}")
        e = ex.as_expr(value)
        exprs[a][b] = e
        exprs[b][a] = e
    return exprs


def rescale_structure(structure: MobiusStructure, rescaling: ConformalRescaling) -> MobiusStructure:
    """New structure with metric omega^2 g and Rho moved by the
    transformation law; composing rescalings multiplies the factors."""
    metric = structure.metric
    if metric.omega is None:
        new_omega = rescaling.omega
    else:
        new_omega = ex.mul(metric.omega, rescaling.omega)
    if isinstance(new_omega, ex.Num) and new_omega.value == 1.0:
        new_metric = tensors.MetricField(metric.n, "flat", None,
                                         label=f"{metric.label}*{rescaling.label}")
    else:
        new_metric = tensors.MetricField(metric.n, "isothermal", new_omega,
                                         label=f"{metric.label}*{rescaling.label}")
    new_rho = _transport_rho_exprs(structure.rho, metric, rescaling)
    return MobiusStructure(new_metric, new_rho, "transformed",
                           label=f"{structure.label}^({rescaling.label})")


# ---------------------------------------------------------------------------
# pointwise operations


def rho_transform(rho_field, rescaling: ConformalRescaling, metric: MetricField, point) -> np.ndarray:
    """Numeric Rho transformation law at a point.

    rho_field may be a MobiusStructure, a callable point -> matrix, or a
    matrix of values at the point.
    """
    n = metric.n
    if isinstance(rho_field, MobiusStructure):
        P = rho_field.rho_value(point)
    elif callable(rho_field):
        P = np.asarray(rho_field(point), dtype=float)
    else:
        P = np.asarray(rho_field, dtype=float)
    ups = rescaling.ups_value(point, n)
    dups = rescaling.dups_value(point, n)
    gamma = christoffel(metric, point)
    g = metric.g(point)
    ginv = metric.g_inv(point)
    nab = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            nab[a, b] = dups[a, b] - sum(gamma[c, a, b] * ups[c] for c in range(n))
    ups_up = ginv @ ups
    trace = float(ups_up @ ups)
    return P - nab + np.outer(ups, ups) - 0.5 * trace * g


def schouten(metric: MetricField, point) -> np.ndarray:
    """Rho from curvature in dimension 3: Ricci - (scalar/4) g."""
    if metric.n != 3:
        raise ValueError("the Schouten formula fixes Rho only in dimension 3")
    curv = tensors.curvature(metric, point)
    return curv.ricci - 0.25 * curv.scalar * metric.g(point)


def mobius_trace_defect(structure: MobiusStructure, point) -> float:
    """g^ab P_ab - R/2 at a point (two dimensions).

    Genuine Moebius structures are trace-normalised: the Rho trace equals
    half the scalar curvature in every gauge (the transformation law
    preserves this).  The toolkit accepts arbitrary symmetric Rho for
    experiments, but the two-dimensional invariance statements (Cotton-York,
    the K two-form) hold exactly on the normalised class, where this defect
    vanishes.
    """
    if structure.n != 2:
        raise ValueError("the trace normalisation check is two-dimensional")
    ginv = structure.metric.g_inv(point)
    tr = float(np.sum(ginv * structure.rho_value(point)))
    scalar = tensors.curvature(structure.metric, point).scalar
    return tr - 0.5 * scalar


def cotton_york(structure: MobiusStructure, point) -> np.ndarray:
    """Y[a, b, c] = nabla_a P_bc - nabla_b P_ac."""
    n = structure.n
    P = structure.rho_value(point)
    dP = structure.drho_value(point)
    gamma = christoffel(structure.metric, point)
    covP = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                acc = dP[a, b, c]
                for d in range(n):
                    acc -= gamma[d, a, b] * P[d, c] + gamma[d, a, c] * P[b, d]
                covP[a, b, c] = acc
    Y = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                Y[a, b, c] = covP[a, b, c] - covP[b, a, c]
    return Y


# ---------------------------------------------------------------------------
# JSON configuration (CLI surface)


def metric_from_config(cfg) -> MetricField:
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("metric spec must be an object with a 'kind' field")
    kind = cfg["kind"]
    n = int(cfg.get("n", 2))
    if kind == "flat":
        return tensors.flat_metric(n)
    if kind == "sphere":
        return tensors.sphere_metric(float(cfg.get("K", 1.0)), n)
    if kind == "hyperbolic":
        return tensors.hyperbolic_metric(float(cfg.get("K", 1.0)), n)
    if kind == "cylinder":
        return tensors.cylinder_metric()
    if kind == "isothermal":
        if "omega" not in cfg:
            raise ValueError("isothermal metric spec needs an 'omega' field")
        return tensors.isothermal_metric(ex.parse(cfg["omega"]), n)
    raise ValueError(f"unknown metric kind {kind!r}")


def structure_from_config(metric_cfg, rho_cfg="flat-model") -> MobiusStructure:
    metric = metric_from_config(metric_cfg)
    if rho_cfg is None:
        rho_cfg = "flat-model"
    return structure_for_metric(metric, rho_cfg)
