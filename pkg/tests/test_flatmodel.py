import cmath
import math

import numpy as np
import pytest

from loxokit import flatmodel as fm


@pytest.fixture
def spec():
    return fm.LoxodromeSpec(-0.8 + 0.1j, 1.1 + 0.5j, 1.0)


class TestLoxodromePoint:
    def test_starts_at_origin(self, spec):
        assert abs(fm.loxodrome_point(spec, 0.0)) < 1e-15

    def test_forward_limit(self, spec):
        assert abs(fm.loxodrome_point(spec, 50.0) - spec.q) < 1e-8

    def test_backward_limit(self, spec):
        assert abs(fm.loxodrome_point(spec, -50.0) - spec.p) < 1e-8

    def test_pole(self):
        # q on the p-orbit of the exponential makes the curve pass through
        # chart infinity at a real parameter value
        theta_star = 0.5
        p = 1.0 + 0.0j
        q = p * cmath.exp((1.0 + 1j) * theta_star)
        spec = fm.LoxodromeSpec(p, q, 1.0)
        with pytest.raises(fm.PoleError):
            fm.loxodrome_point(spec, theta_star)

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            fm.LoxodromeSpec(1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            fm.LoxodromeSpec(0.0, 1.0, 0.0)

    def test_log_spiral_form(self):
        spec = fm.LoxodromeSpec.log_spiral(2.0)
        assert abs(fm.loxodrome_point(spec, 0.7) - cmath.exp((2.0 + 1j) * 0.7)) < 1e-15


class TestGenerator:
    def test_discriminant_exact(self, spec):
        assert abs(fm.generator(spec).discriminant() - (1.0 + 1j) ** 2) < 1e-13

    def test_tangency_analytic(self, spec):
        # direct differentiation gives dz/dtheta = (beta+i)(z-p)(z-q)/(p-q)
        k = fm.generator(spec)
        lam = spec.beta + 1j
        for theta in (-0.8, 0.0, 1.1):
            z = fm.loxodrome_point(spec, theta)
            analytic = lam * (z - spec.p) * (z - spec.q) / (spec.p - spec.q)
            assert abs(k.quadratic(z) - analytic) < 1e-12

    def test_tangency_central_difference(self, spec):
        k = fm.generator(spec)
        h = 1e-6
        for theta in (-0.5, 0.4):
            z = fm.loxodrome_point(spec, theta)
            fd = (fm.loxodrome_point(spec, theta + h)
                  - fm.loxodrome_point(spec, theta - h)) / (2 * h)
            assert abs(k.quadratic(z) - fd) < 1e-8

    def test_one_point_form_is_linear_field(self):
        spec = fm.LoxodromeSpec.log_spiral(1.4)
        k = fm.generator(spec)
        assert k.a == 0 and abs(k.b - (1.4 + 1j)) < 1e-15 and k.c == 0

    def test_coefficient_dictionary(self, rng):
        vals = rng.normal(size=6)
        k = fm.KillingCoefficients(*[float(v) for v in vals])
        back = fm.KillingCoefficients.from_abc(k.a, k.b, k.c)
        assert k == back


class TestKillingFlow:
    def test_translation(self):
        k = fm.KillingCoefficients(u=0.7, v=-0.3)
        z = fm.killing_flow(k, 2.0, 0.1 + 0.2j)
        assert abs(z - (0.1 + 0.2j + 2.0 * (0.7 - 0.3j))) < 1e-13

    def test_rotation(self):
        k = fm.KillingCoefficients(F=1.1)
        z0 = 0.4 - 0.6j
        z = fm.killing_flow(k, 0.9, z0)
        assert abs(z - z0 * cmath.exp(1j * 1.1 * 0.9)) < 1e-13

    def test_generator_advances_parameter_at_half_rate(self, spec):
        # the real field is half the complex quadratic, so duration 2t
        # advances the family parameter by t
        k = fm.generator(spec)
        z0 = fm.loxodrome_point(spec, 0.2)
        z1 = fm.killing_flow(k, 2.0 * 0.5, z0)
        assert abs(z1 - fm.loxodrome_point(spec, 0.7)) < 1e-10

    def test_against_rk_oracle(self, rng):
        def rk_flow(k, t, z0, steps=2000):
            z = z0
            h = t / steps
            for _ in range(steps):
                k1 = fm.killing_velocity(k, z)
                k2 = fm.killing_velocity(k, z + 0.5 * h * k1)
                k3 = fm.killing_velocity(k, z + 0.5 * h * k2)
                k4 = fm.killing_velocity(k, z + h * k3)
                z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            return z

        for _ in range(5):
            k = fm.KillingCoefficients(*[float(v) for v in rng.normal(size=6)])
            z0 = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
            t = float(rng.uniform(-0.5, 0.5))
            assert abs(fm.killing_flow(k, t, z0) - rk_flow(k, t, z0)) < 1e-8

    def test_velocity_is_half_quadratic(self, rng):
        k = fm.KillingCoefficients(*[float(v) for v in rng.normal(size=6)])
        z = 0.3 - 0.8j
        assert abs(fm.killing_velocity(k, z) - 0.5 * k.quadratic(z)) < 1e-14

    def test_flow_to_chart_infinity(self):
        # pure inversion flow: 1/z(t) = 1/z0 - a t / 2 hits zero in finite time
        k = fm.KillingCoefficients(P=1.0)
        z0 = 1.0 + 0j
        t_star = 2.0 / (1.0 * z0.real)
        with pytest.raises(fm.PoleError):
            fm.killing_flow(k, t_star, z0)


class TestClassify:
    def test_rotation_is_circular(self):
        out = fm.classify(fm.KillingCoefficients(F=1.0))
        assert out.kind == "circular" and out.beta is None

    def test_dilation_is_radial(self):
        assert fm.classify(fm.KillingCoefficients(lam=1.0)).kind == "radial"

    def test_mixed_is_ordinal_loxodromic(self):
        out = fm.classify(fm.KillingCoefficients(lam=1.0, F=1.0))
        assert out.kind == "loxodromic"
        assert out.beta == pytest.approx(1.0, abs=1e-12)
        assert out.handedness == "right"

    def test_translation_is_degenerate(self):
        assert fm.classify(fm.KillingCoefficients(u=1.0, v=0.5)).kind == "degenerate"

    def test_zero_field_rejected(self):
        with pytest.raises(ValueError):
            fm.classify(fm.KillingCoefficients())

    def test_beta_recovery(self, rng):
        for _ in range(100):
            beta = float(rng.uniform(0.1, 10.0))
            p = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            q = p + cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            out = fm.classify(fm.generator(fm.LoxodromeSpec(p, q, beta)))
            assert out.kind == "loxodromic"
            assert abs(out.beta - beta) < 1e-9

    def test_left_handed(self):
        out = fm.classify(fm.generator(fm.LoxodromeSpec(-1.0, 1.0, -2.0)))
        assert out.handedness == "left" and out.beta == pytest.approx(-2.0, abs=1e-12)


class TestMercator:
    def test_unit(self):
        assert fm.mercator(1.0 + 0j) == (0.0, 0.0)

    def test_equator(self):
        u, v = fm.mercator(cmath.exp(0.4j))
        assert abs(v) < 1e-15 and abs(u - 0.4 / (2 * math.pi)) < 1e-15

    def test_origin_rejected(self):
        with pytest.raises(ValueError):
            fm.mercator(0j)

    def test_spiral_becomes_line(self):
        beta = 1.7
        zs = [cmath.exp((beta + 1j) * t) for t in np.linspace(0.0, 9.0, 500)]
        for u, v in fm.mercator_path(zs):
            assert abs(v - beta * u) < 1e-10


class TestSpiralChart:
    def test_moebius_change(self, spec):
        for theta in (-0.9, 0.0, 0.8):
            z = fm.loxodrome_point(spec, theta)
            zeta = fm.to_spiral_coordinates(spec, z)
            assert abs(zeta - cmath.exp((spec.beta + 1j) * theta)) < 1e-10

    def test_curve_exprs_match_points(self, spec):
        from loxokit import expr as ex
        coords = fm.loxodrome_curve_exprs(spec)
        for theta in (-1.0, 0.3, 1.2):
            z = fm.loxodrome_point(spec, theta)
            x = ex.evaluate(coords[0], {"t": theta})
            y = ex.evaluate(coords[1], {"t": theta})
            assert abs(complex(x, y) - z) < 1e-12
