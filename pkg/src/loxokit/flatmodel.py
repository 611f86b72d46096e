"""Loxodromes and conformal motions of the flat model (the Riemann sphere).

A loxodrome from p to q with bearing beta is

    z(theta) = p q (e^{(beta+i) theta} - 1) / (p e^{(beta+i) theta} - q),

whose generator is the quadratic holomorphic field (a z^2 + b z + c) d/dz
with a = (beta+i)/(p-q), b = -(beta+i)(p+q)/(p-q), c = (beta+i) p q/(p-q).
Differentiating the curve gives dz/dtheta = a z^2 + b z + c.

Flows are flows of the real field X = Re(Z).  In real components X reads
u dx + v dy + dilations + rotations + inversions; as a complex ODE this is
zdot = (a z^2 + b z + c)/2, the one-half coming from Re(Z) = (Z + Zbar)/2.
With that convention the time-2t flow of the generator advances theta by t.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "LoxodromeSpec",
    "KillingCoefficients",
    "Classification",
    "PoleError",
    "loxodrome_point",
    "generator",
    "killing_velocity",
    "killing_flow",
    "classify",
    "mercator",
    "mercator_path",
    "to_spiral_coordinates",
    "loxodrome_curve_exprs",
]

POLE_EPS = 1e-14


class PoleError(ArithmeticError):
    """The requested point or flow passed through chart infinity."""


@dataclass(frozen=True)
class LoxodromeSpec:
    """Endpoints p, q and bearing beta (beta < 0 encodes a left-handed curve).

    q = None represents the one-point form with q at chart infinity: the
    logarithmic spiral z = p + z0 e^{(beta+i) theta} about p (the classical
    spiral for p = 0, z0 = 1).
    """

    p: complex
    q: complex | None
    beta: float
    z0: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.beta == 0.0:
            raise ValueError("bearing must be non-zero (beta = 0 is the circle limit)")
        if self.q is not None and self.p == self.q:
            raise ValueError("endpoints must differ")

    @classmethod
    def log_spiral(cls, beta: float, center: complex = 0j, z0: complex = 1.0 + 0.0j):
        return cls(p=complex(center), q=None, beta=float(beta), z0=complex(z0))

    @property
    def handedness(self) -> str:
        return "right" if self.beta > 0 else "left"


def loxodrome_point(spec: LoxodromeSpec, theta: float) -> complex:
    w = cmath.exp((spec.beta + 1j) * theta)
    if spec.q is None:
        return spec.p + spec.z0 * w
    num = spec.p * spec.q * (w - 1.0)
    den = spec.p * w - spec.q
    scale = max(abs(spec.p) * abs(w), abs(spec.q), 1.0)
    if abs(den) < POLE_EPS * scale:
        raise PoleError(f"loxodrome passes through chart infinity near theta={theta}")
    return num / den


@dataclass(frozen=True)
class KillingCoefficients:
    """Conformal Killing field data: translations (u, v), dilation lambda,
    rotation F, inversions (P, Q); equivalently the quadratic a z^2 + b z + c
    with a = P + iQ, b = 2(lambda + iF), c = 2(u + iv)."""

    u: float = 0.0
    v: float = 0.0
    lam: float = 0.0
    F: float = 0.0
    P: float = 0.0
    Q: float = 0.0

    @property
    def a(self) -> complex:
        return complex(self.P, self.Q)

    @property
    def b(self) -> complex:
        return 2.0 * complex(self.lam, self.F)

    @property
    def c(self) -> complex:
        return 2.0 * complex(self.u, self.v)

    @classmethod
    def from_abc(cls, a: complex, b: complex, c: complex) -> "KillingCoefficients":
        return cls(u=c.real / 2.0, v=c.imag / 2.0,
                   lam=b.real / 2.0, F=b.imag / 2.0,
                   P=a.real, Q=a.imag)

    def quadratic(self, z: complex) -> complex:
        return (self.a * z + self.b) * z + self.c

    def discriminant(self) -> complex:
        return self.b * self.b - 4.0 * self.a * self.c

    def is_zero(self, tol: float = 0.0) -> bool:
        m = max(abs(self.u), abs(self.v), abs(self.lam), abs(self.F), abs(self.P), abs(self.Q))
        return m <= tol


def generator(spec: LoxodromeSpec) -> KillingCoefficients:
    """Killing coefficients of the holomorphic field tangent to the curve,
    normalised so that a z^2 + b z + c equals dz/dtheta along it."""
    lam = spec.beta + 1j
    if spec.q is None:
        # double fixed point at infinity collapses to the b z + c form
        a = 0j
        b = lam
        c = -lam * spec.p
        return KillingCoefficients.from_abc(a, b, c)
    a = lam / (spec.p - spec.q)
    b = -lam * (spec.p + spec.q) / (spec.p - spec.q)
    c = lam * spec.p * spec.q / (spec.p - spec.q)
    return KillingCoefficients.from_abc(a, b, c)


def killing_velocity(k: KillingCoefficients, z: complex) -> complex:
    """zdot of the real field X = Re(Z) at z; equals quadratic(z)/2."""
    x, y = z.real, z.imag
    dx = k.u + k.lam * x - k.F * y + 0.5 * k.P * (x * x - y * y) - k.Q * x * y
    dy = k.v + k.lam * y + k.F * x + k.P * x * y + 0.5 * k.Q * (x * x - y * y)
    return complex(dx, dy)


def killing_flow(k: KillingCoefficients, t: float, z0: complex) -> complex:
    """Time-t flow of the real field X = Re(Z) through z0.

    Computed by exponentiating the trace-free 2x2 complex matrix of the
    half-quadratic and applying the fractional-linear map.
    """
    a, b, c = k.a, k.b, k.c
    m11 = b / 4.0
    m12 = c / 2.0
    m21 = -a / 2.0
    # trace-free: exp(tM) = cosh(t w) I + sinh(t w)/w M with w^2 = -det M
    w2 = m11 * m11 + m12 * m21
    w = cmath.sqrt(w2)
    tw = t * w
    if abs(tw) < 1e-8:
        # series for sinh(tw)/w, stable through w -> 0
        ch = 1.0 + tw * tw / 2.0 + tw ** 4 / 24.0
        sh_over = t * (1.0 + tw * tw / 6.0 + tw ** 4 / 120.0)
    else:
        ch = cmath.cosh(tw)
        sh_over = cmath.sinh(tw) / w
    g11 = ch + sh_over * m11
    g12 = sh_over * m12
    g21 = sh_over * m21
    g22 = ch - sh_over * m11
    den = g21 * z0 + g22
    scale = max(abs(g21) * abs(z0), abs(g22), 1.0)
    if abs(den) < POLE_EPS * scale:
        raise PoleError(f"flow reached chart infinity at t={t}")
    return (g11 * z0 + g12) / den


@dataclass(frozen=True)
class Classification:
    kind: str                      # degenerate | circular | radial | loxodromic
    beta: float | None
    handedness: str | None
    discriminant: complex


def classify(k: KillingCoefficients, tol: float = 1e-12) -> Classification:
    """Orbit type of a conformal Killing field from its discriminant.

    D = 0: orbits are circles through the double fixed point (degenerate);
    D real negative: circles; D real positive: radial curves; otherwise
    loxodromic with bearing beta solving Re D / Im D = (beta^2 - 1)/(2 beta),
    the sign of beta following the sign of Im D.
    """
    if k.is_zero():
        raise ValueError("cannot classify the zero field")
    D = k.discriminant()
    scale = max(abs(k.a), abs(k.b), abs(k.c)) ** 2
    if abs(D) <= tol * scale:
        return Classification("degenerate", None, None, D)
    if abs(D.imag) <= tol * scale:
        if D.real < 0.0:
            return Classification("circular", None, None, D)
        return Classification("radial", None, None, D)
    ratio = D.real / D.imag
    root = math.sqrt(ratio * ratio + 1.0)
    beta = ratio + root if D.imag > 0.0 else ratio - root
    return Classification("loxodromic", beta, "right" if beta > 0 else "left", D)


def mercator(z: complex) -> tuple[float, float]:
    """Principal-branch Mercator coordinates: 2 pi i (u - i v) = log z."""
    if z == 0:
        raise ValueError("Mercator projection is undefined at the origin")
    return (cmath.phase(z) / (2.0 * math.pi), math.log(abs(z)) / (2.0 * math.pi))


def mercator_path(zs) -> list[tuple[float, float]]:
    """Mercator coordinates along a path, with the argument unwound
    continuously from the first sample."""
    out = []
    prev_arg = None
    turns = 0.0
    for z in zs:
        if z == 0:
            raise ValueError("Mercator projection is undefined at the origin")
        arg = cmath.phase(z)
        if prev_arg is not None:
            d = arg - prev_arg
            if d > math.pi:
                turns -= 2.0 * math.pi
            elif d < -math.pi:
                turns += 2.0 * math.pi
        prev_arg = arg
        out.append(((arg + turns) / (2.0 * math.pi), math.log(abs(z)) / (2.0 * math.pi)))
    return out


def loxodrome_curve_exprs(spec: LoxodromeSpec, tvar: str = "t"):
    """Coordinate expressions of the loxodrome as symbolic functions of the
    family parameter theta (named ``tvar``), for exact jet extraction."""
    from . import expr as ex

    t = ex.var(tvar)
    growth = ex.call("exp", ex.mul(ex.num(spec.beta), t))
    Er = ex.mul(growth, ex.call("cos", t))
    Ei = ex.mul(growth, ex.call("sin", t))

    def cmul(ar, ai, br, bi):
        return (ex.sub(ex.mul(ar, br), ex.mul(ai, bi)),
                ex.add(ex.mul(ar, bi), ex.mul(ai, br)))

    if spec.q is None:
        zr, zi = cmul(ex.num(spec.z0.real), ex.num(spec.z0.imag), Er, Ei)
        return [ex.add(ex.num(spec.p.real), zr), ex.add(ex.num(spec.p.imag), zi)]

    pq = spec.p * spec.q
    nr, ni = cmul(ex.num(pq.real), ex.num(pq.imag), ex.sub(Er, ex.num(1.0)), Ei)
    dr_, di_ = cmul(ex.num(spec.p.real), ex.num(spec.p.imag), Er, Ei)
    dr = ex.sub(dr_, ex.num(spec.q.real))
    di = ex.sub(di_, ex.num(spec.q.imag))
    denom = ex.add(ex.mul(dr, dr), ex.mul(di, di))
    xr = ex.div(ex.add(ex.mul(nr, dr), ex.mul(ni, di)), denom)
    xi = ex.div(ex.sub(ex.mul(ni, dr), ex.mul(nr, di)), denom)
    return [xr, xi]


def to_spiral_coordinates(spec: LoxodromeSpec, z: complex) -> complex:
    """Fractional-linear change sending p -> 0 and q -> infinity; maps the
    loxodrome onto the logarithmic spiral e^{(beta+i) theta}."""
    if spec.q is None:
        return (z - spec.p) / spec.z0
    num = spec.q * (z - spec.p)
    den = spec.p * (z - spec.q)
    scale = max(abs(num), abs(spec.p) * abs(z - spec.q), 1.0)
    if abs(den) < POLE_EPS * scale:
        raise PoleError("point sits at a pole of the spiral chart")
    return num / den
