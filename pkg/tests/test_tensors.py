import math

import numpy as np
import pytest

from loxokit import expr as ex
from loxokit import tensors
from loxokit.tensors import (
    SingularMetricError,
    Weight,
    christoffel,
    curvature,
    epsilon_upper,
    flat_metric,
    hyperbolic_metric,
    inner,
    isothermal_metric,
    lower_index,
    raise_index,
    sphere_metric,
)


def christoffel_fd_oracle(metric, point, h=1e-5):
    """Independent route: the general formula fed with finite-difference dg."""
    n = metric.n
    ginv = metric.g_inv(point)
    dg = metric.dg_fd(point, h)
    gamma = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                acc = 0.0
                for d in range(n):
                    acc += ginv[a, d] * (dg[b, d, c] + dg[c, b, d] - dg[d, b, c])
                gamma[a, b, c] = 0.5 * acc
    return gamma


class TestChristoffel:
    def test_flat_zero(self):
        assert np.all(christoffel(flat_metric(2), (0.3, -0.7)) == 0.0)

    def test_symmetry_exact(self):
        m = sphere_metric(1.0, 2)
        g = christoffel(m, (0.4, 0.9))
        assert np.array_equal(g, np.transpose(g, (0, 2, 1)))

    def test_isothermal_closed_form(self):
        m = isothermal_metric("exp(0.3*x - 0.2*y)")
        pt = (0.5, -0.3)
        gamma = christoffel(m, pt)
        ups = [ex.evaluate(e, pt) for e in m.ups_exprs()]
        expected = np.zeros((2, 2, 2))
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    expected[a, b, c] = ((a == b) * ups[c] + (a == c) * ups[b]
                                         - (b == c) * ups[a])
        assert np.max(np.abs(gamma - expected)) < 1e-14

    def test_against_fd_oracle(self):
        m = isothermal_metric("2/(1+x^2+y^2)")
        for pt in [(0.0, 0.0), (0.6, -0.4), (1.2, 0.8)]:
            gap = np.max(np.abs(christoffel(m, pt) - christoffel_fd_oracle(m, pt)))
            assert gap < 1e-9

    def test_singular_metric(self):
        m = isothermal_metric("x")
        with pytest.raises(SingularMetricError):
            christoffel(m, (-1.0, 0.0))


class TestCurvature:
    def test_flat_zero(self):
        c = curvature(flat_metric(2), (0.2, 0.1))
        assert np.all(c.riemann == 0.0)
        assert c.scalar == 0.0

    def test_sphere_scalar_2d(self):
        for K in (1.0, 2.5):
            m = sphere_metric(K, 2)
            for pt in [(0.0, 0.0), (0.7, -0.2), (1.5, 1.1)]:
                assert abs(curvature(m, pt).scalar - 2.0 * K) < 1e-7

    def test_sphere_scalar_3d(self):
        m = sphere_metric(1.0, 3)
        assert abs(curvature(m, (0.2, -0.1, 0.4)).scalar - 6.0) < 1e-7

    def test_hyperbolic_scalar(self):
        m = hyperbolic_metric(1.0, 2)
        assert abs(curvature(m, (0.3, 0.2)).scalar + 2.0) < 1e-7

    def test_ricci_symmetry(self):
        m = sphere_metric(1.0, 3)
        c = curvature(m, (0.3, -0.5, 0.2))
        assert np.max(np.abs(c.ricci - c.ricci.T)) < 1e-10

    def test_2d_einstein_identity(self):
        m = isothermal_metric("exp(0.2*x + 0.3*y)")
        for pt in [(0.1, 0.2), (-0.5, 0.7)]:
            c = curvature(m, pt)
            g = m.g(pt)
            assert np.max(np.abs(c.ricci - 0.5 * c.scalar * g)) < 1e-8

    def test_first_bianchi(self, rng):
        for m in (sphere_metric(1.0, 2), hyperbolic_metric(0.5, 2), sphere_metric(2.0, 3)):
            for _ in range(4):
                pt = rng.uniform(-0.6, 0.6, m.n)
                R = curvature(m, pt).riemann_lowered
                cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
                assert np.max(np.abs(cyc)) < 1e-8

    def test_gaussian_curvature_everywhere(self, rng):
        m = sphere_metric(1.0, 2)
        for _ in range(10):
            pt = rng.uniform(-2.0, 2.0, 2)
            assert abs(curvature(m, pt).scalar / 2.0 - 1.0) < 1e-7


class TestEpsilon:
    def test_flat(self):
        eps = epsilon_upper(flat_metric(2), (0.4, 0.2))
        assert eps[0, 1] == 1.0

    def test_isothermal(self):
        m = isothermal_metric("2/(1+x^2+y^2)")
        pt = (0.7, -0.1)
        w = m.omega_value(pt)
        assert abs(epsilon_upper(m, pt)[0, 1] - w ** -2) < 1e-14

    def test_antisymmetry_exact(self):
        eps = epsilon_upper(sphere_metric(1.0, 2), (0.2, 0.9))
        assert np.array_equal(eps, -eps.T)

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            epsilon_upper(flat_metric(3), (0, 0, 0))


class TestIndexGymnastics:
    def test_raise_lower_roundtrip(self, rng):
        m = sphere_metric(1.0, 2)
        pt = (0.3, 0.4)
        v = rng.normal(size=2)
        back = raise_index(lower_index(v, m.g(pt)), m.g_inv(pt))
        assert np.max(np.abs(back - v)) < 1e-14

    def test_unit_norm(self):
        m = sphere_metric(1.0, 2)
        pt = (0.5, -0.5)
        g = m.g(pt)
        v = np.array([1.0, 2.0])
        u = v / math.sqrt(inner(v, v, g))
        assert abs(inner(u, u, g) - 1.0) < 1e-14

    def test_positive_norms(self, rng):
        m = sphere_metric(1.0, 2)
        for _ in range(10):
            pt = rng.uniform(-1, 1, 2)
            v = rng.normal(size=2)
            assert inner(v, v, m.g(pt)) > 0.0


class TestWeight:
    def test_addition(self):
        assert Weight(2) + Weight(-1) == Weight(1)

    def test_rescale_factor(self):
        assert Weight(-2).rescale_factor(2.0) == 0.25

    def test_symbolic_dg_matches_omega_derivative(self):
        m = isothermal_metric("2/(1+x^2+y^2)")
        pt = (0.4, -0.6)
        assert np.max(np.abs(m.dg(pt) - m.dg_fd(pt))) < 1e-9
