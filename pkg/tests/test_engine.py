import math

import numpy as np
import pytest

from loxokit import expr as ex
from loxokit.engine import (
    IntegratorConfig,
    conformal_circle_rhs,
    dk4_rhs,
    integrate,
    invariance_experiment,
    lift_null_residual,
    line_preservation_residual,
    ordinal_loxodrome_rhs,
    polyline_distance,
)
from loxokit.kinematics import DegenerateJerkError, KinematicState, SymbolicCurve
from loxokit.mobius import ConformalRescaling, structure_for_metric
from loxokit.tensors import cylinder_metric, sphere_metric
from loxokit.verify import spiral_coords


def circle_init(a=1.0):
    return KinematicState(x=np.array([1.0 / a, 0.0]), U=np.array([0.0, 1.0]),
                          A=np.array([-a, 0.0]), gauge="flat")


def sphere_rescaling():
    return ConformalRescaling(ex.parse("2/(1 + x^2 + y^2)"), label="sphere-gauge")


class TestCircleSystem:
    def test_straight_line(self, flat2):
        init = KinematicState(x=np.zeros(2), U=np.array([1.0, 0.0]),
                              A=np.zeros(2), gauge="flat")
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=10.0)
        t = integrate("circle", init, flat2, cfg)
        assert t.reason == "completed"
        assert np.max(np.abs(t.x[-1] - [10.0, 0.0])) < 1e-10

    def test_circle_closure(self, flat2):
        for a in (0.5, 1.0, 2.0):
            cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3,
                                   max_length=2.0 * math.pi / a)
            t = integrate("circle", circle_init(a), flat2, cfg)
            assert t.reason == "completed"
            assert np.linalg.norm(t.x[-1] - t.x[0]) < 1e-7

    def test_sphere_geodesic_is_great_circle(self):
        sphere = structure_for_metric(sphere_metric(1.0, 2), "flat-model")
        init = KinematicState(x=np.array([1.0, 0.0]), U=np.array([0.0, 1.0]),
                              A=np.zeros(2), gauge=sphere.label)
        rhs = conformal_circle_rhs(init, sphere)
        assert np.max(np.abs(rhs[4:6])) < 1e-10  # acceleration stays zero
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=2 * math.pi)
        t = integrate("circle", init, sphere, cfg)
        # the equator of the unit sphere: |x| = 1 throughout, closing orbit
        assert np.max(np.abs(np.linalg.norm(t.x, axis=1) - 1.0)) < 1e-8
        assert np.linalg.norm(t.x[-1] - t.x[0]) < 1e-7


class TestLoxodromeSystem:
    def test_rhs_matches_symbolic_tower_flat(self, flat2):
        # on the ordinal spiral the system rates equal the curve's true rates
        curve = SymbolicCurve(spiral_coords(1.0), flat2)
        tw = curve.tower(0.4)
        rhs = ordinal_loxodrome_rhs(tw["state"], flat2)
        # flat chart: coordinate and covariant rates coincide
        assert np.max(np.abs(rhs[0:2] - tw["U"])) < 1e-12
        assert np.max(np.abs(rhs[4:6] - tw["dA"])) < 1e-11
        assert np.max(np.abs(rhs[6:8] - tw["dJ"])) < 1e-11
        assert abs(rhs[8] - tw["dkappa"]) < 1e-11

    def test_rhs_dkappa_is_the_ordinal_law(self, flat2):
        # for a non-ordinal bearing the system's kappa rate differs from the
        # curve's true rate by exactly the equation residual
        beta = 1.3
        curve = SymbolicCurve(spiral_coords(beta), flat2)
        tw = curve.tower(0.4)
        rhs = ordinal_loxodrome_rhs(tw["state"], flat2)
        s = math.sqrt(1 + beta * beta) / beta * math.exp(beta * 0.4)
        bracket = (1.0 - beta * beta) / (2.0 * beta * beta * s * s)
        assert abs((tw["dkappa"] - rhs[8]) - bracket) < 1e-10

    def test_dkappa_matches_tower_in_sphere_gauge(self, flat2):
        from loxokit.mobius import rescale_structure
        sphere = rescale_structure(flat2, sphere_rescaling())
        curve = SymbolicCurve(spiral_coords(1.0), sphere)
        tw = curve.tower(0.3)
        rhs = ordinal_loxodrome_rhs(tw["state"], sphere)
        assert abs(rhs[8] - tw["dkappa"]) < 1e-10

    def test_constraint_drift_over_long_run(self, flat2):
        init = SymbolicCurve(spiral_coords(1.0), flat2).state(0.0)
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=20.0)
        t = integrate("loxodrome", init, flat2, cfg)
        res = t.max_residuals()
        assert t.reason == "completed"
        assert res["unit"] < 1e-8 and res["orthoA"] < 1e-8 and res["orthoJ"] < 1e-8

    def test_ordinal_residual_along_beta2_spiral(self, flat2):
        # Frenet oracle: kappa = 1/s, A.A = 1/(beta s)^2, so the equation
        # residual equals (1 - beta^2) / (2 beta^2 s^2)
        beta = 2.0
        curve = SymbolicCurve(spiral_coords(beta), flat2)
        for t in (0.0, 0.4, 0.9):
            tw = curve.tower(t)
            s = math.sqrt(1 + beta * beta) / beta * math.exp(beta * t)
            expected = (1.0 - beta * beta) / (2.0 * beta * beta * s * s)
            bracket = tw["dkappa"] + 0.5 * (float(tw["A"] @ tw["A"]) + tw["kappa"] ** 2)
            assert abs(bracket - expected) < 1e-6

    def test_degenerate_jerk_abort_during_run(self, flat2):
        # a near-circular state whose jerk shrinks through the threshold
        curve = SymbolicCurve(spiral_coords(1.0), flat2)
        st = curve.state(0.0)
        st.J = st.J * (2e-10 / np.linalg.norm(st.J))
        st.kappa = 10.0  # strong damping drives |J| below threshold
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-4, max_length=5.0)
        t = integrate("loxodrome", st, flat2, cfg)
        assert t.reason == "degenerate-jerk"


class TestDk4System:
    def test_circle_stays_conformal_circle(self, flat2):
        init = circle_init(1.0)
        init.J = np.zeros(2)
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=2 * math.pi)
        t = integrate("dk4", init, flat2, cfg)
        assert np.max(np.abs(t.J)) == 0.0
        assert np.linalg.norm(t.x[-1] - t.x[0]) < 1e-7

    def test_cylinder_line_is_solution(self):
        beta = 1.7
        cyl = structure_for_metric(cylinder_metric(), "flat-model")
        den = math.sqrt(1 + beta * beta)
        U = np.array([beta / den, 1.0 / den])
        PUU = (-0.5 * beta * beta + 0.5) / (beta * beta + 1)
        PU = np.array([-0.5 * beta, 0.5]) / den
        J = PUU * U - PU
        init = KinematicState(x=np.zeros(2), U=U, A=np.zeros(2), J=J, gauge=cyl.label)
        rhs = dk4_rhs(init, cyl)
        assert np.max(np.abs(rhs[4:6])) < 1e-14   # A stays zero on the line
        assert np.max(np.abs(rhs[6:8])) < 1e-14   # J is parallel along it
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=5.0)
        t = integrate("dk4", init, cyl, cfg)
        deviation = np.max(np.abs(t.x[:, 0] * U[1] - t.x[:, 1] * U[0]))
        assert deviation < 1e-10

    def test_flat_spiral_is_not_a_solution(self, flat2):
        # in the flat arc-length gauge the snap does not vanish: |S| = |k''|
        from loxokit.kinematics import k_two_form
        beta = 1.7
        curve = SymbolicCurve(spiral_coords(beta), flat2)
        tw = curve.tower(0.0)
        K = k_two_form(flat2, tw["U"], tw["A"], tw["x"])
        s = math.sqrt(1 + beta * beta) / beta
        residual = np.linalg.norm(tw["S"] - K @ tw["U"])
        assert abs(residual - 2.0 / (beta * s ** 3)) < 1e-6
        assert residual > 1e-3


class TestIntegrate:
    def test_zero_length(self, flat2):
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=0.0)
        t = integrate("circle", circle_init(), flat2, cfg)
        assert len(t) == 1 and t.reason == "completed"

    def test_scheme_cross_check(self, flat2):
        cfg4 = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=2 * math.pi)
        cfg45 = IntegratorConfig(scheme="rk45-adaptive", step=1e-3, tol=1e-12,
                                 max_length=2 * math.pi)
        t4 = integrate("circle", circle_init(), flat2, cfg4)
        t45 = integrate("circle", circle_init(), flat2, cfg45)
        assert np.linalg.norm(t4.x[-1] - t45.x[-1]) < 1e-8

    def test_rejects_constraint_violation(self, flat2):
        bad = KinematicState(x=np.zeros(2), U=np.array([1.0, 0.1]),
                             A=np.array([0.0, 1.0]), gauge="flat")
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=1.0)
        with pytest.raises(ValueError):
            integrate("circle", bad, flat2, cfg)

    def test_rejects_degenerate_initial_jerk(self, flat2):
        init = circle_init()
        init.J = np.zeros(2)
        init.kappa = 0.3
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=1.0)
        with pytest.raises(DegenerateJerkError):
            integrate("loxodrome", init, flat2, cfg)

    def test_chart_escape(self, flat2):
        init = KinematicState(x=np.zeros(2), U=np.array([1.0, 0.0]),
                              A=np.zeros(2), gauge="flat")
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-2, max_length=100.0,
                               chart_bound=10.0)
        t = integrate("circle", init, flat2, cfg)
        assert t.reason == "chart-escape"
        assert np.max(np.abs(t.x)) <= 10.0

    def test_drift_abort(self, flat2):
        init = SymbolicCurve(spiral_coords(1.0), flat2).state(0.0)
        cfg = IntegratorConfig(scheme="rk4-fixed", step=0.5, max_length=50.0,
                               drift_abort=1e-10)
        t = integrate("loxodrome", init, flat2, cfg)
        assert t.reason == "constraint-drift"

    def test_renormalisation_keeps_constraints_tight(self, flat2):
        init = SymbolicCurve(spiral_coords(1.0), flat2).state(0.0)
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-2, max_length=10.0,
                               renormalize=True)
        t = integrate("loxodrome", init, flat2, cfg)
        res = t.max_residuals()
        assert res["unit"] < 1e-14 and res["orthoA"] < 1e-13

    def test_unknown_system(self, flat2):
        with pytest.raises(ValueError):
            integrate("helix", circle_init(), flat2, IntegratorConfig(max_length=1.0))

    def test_summary_fields(self, flat2):
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=1.0)
        t = integrate("circle", circle_init(), flat2, cfg)
        s = t.summary()
        assert s["termination"] == "completed"
        assert s["system"] == "circle"
        assert s["config"]["step"] == 1e-3


class TestInvarianceExperiment:
    def test_trivial_rescaling(self, flat2):
        init = circle_init()
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=3.0)
        rep = invariance_experiment(flat2, ConformalRescaling(ex.Num(1.0)), init,
                                    cfg, system="circle")
        assert rep["trace_distance"] < 1e-12

    def test_circle_flat_vs_sphere(self, flat2):
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=8.0)
        rep = invariance_experiment(flat2, sphere_rescaling(), circle_init(), cfg,
                                    system="circle")
        assert rep["trace_distance"] < 1e-6

    def test_loxodrome_flat_vs_sphere(self, flat2):
        init = SymbolicCurve(spiral_coords(1.0), flat2).state(0.0)
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=20.0)
        rep = invariance_experiment(flat2, sphere_rescaling(), init, cfg,
                                    system="loxodrome")
        assert rep["trace_distance"] < 1e-6
        assert rep["transformed_constraint_residual"] < 1e-9


class TestTraceInvariants:
    def test_null_and_line_preservation_along_trace(self, flat2):
        init = SymbolicCurve(spiral_coords(1.0), flat2).state(0.0)
        cfg = IntegratorConfig(scheme="rk4-fixed", step=1e-3, max_length=5.0)
        t = integrate("loxodrome", init, flat2, cfg)
        assert t.max_residuals()["null"] < 1e-8
        for i in range(0, len(t), 500):
            st = t.state(i)
            assert lift_null_residual(st, flat2) < 1e-8
            assert line_preservation_residual(st, flat2) < 1e-8

    def test_rk4_convergence_order(self, flat2):
        from loxokit.kinematics import transform_state
        from loxokit.mobius import rescale_structure
        sphere = structure_for_metric(sphere_metric(1.0), "flat-model")
        base = SymbolicCurve(spiral_coords(1.0), flat2).state(0.0)
        init = transform_state(base, sphere_rescaling(), flat2.metric,
                               gauge=sphere.label)
        ends = []
        for h in (2e-2, 1e-2, 5e-3):
            cfg = IntegratorConfig(scheme="rk4-fixed", step=h, max_length=1.2,
                                   drift_abort=1e-2)
            ends.append(integrate("loxodrome", init, sphere, cfg).x[-1])
        ratio = (np.linalg.norm(ends[0] - ends[1])
                 / np.linalg.norm(ends[1] - ends[2]))
        assert 12.0 <= ratio <= 20.0


class TestCsv:
    def test_header_and_empty_columns(self, flat2):
        cfg = IntegratorConfig(scheme="rk4-fixed", step=0.5, max_length=1.0)
        t = integrate("circle", circle_init(), flat2, cfg)
        text = t.to_csv_text()
        lines = text.strip().split("\n")
        assert lines[0] == ("s,x1,x2,U1,U2,A1,A2,J1,J2,kappa,"
                            "res_unit,res_orthoA,res_orthoJ,res_null")
        first = lines[1].split(",")
        assert first[7] == "" and first[8] == "" and first[9] == ""   # J, kappa empty
        assert first[12] == "" and first[13] == ""                    # orthoJ, null empty

    def test_seventeen_digit_roundtrip(self, flat2):
        cfg = IntegratorConfig(scheme="rk4-fixed", step=0.1, max_length=0.5)
        t = integrate("loxodrome", SymbolicCurve(spiral_coords(1.0), flat2).state(0.0),
                      flat2, cfg)
        lines = t.to_csv_text().strip().split("\n")[1:]
        for line, row in zip(lines, t.samples):
            fields = line.split(",")
            for text, value in zip(fields, row):
                if text == "":
                    assert math.isnan(value)
                else:
                    assert float(text) == value  # exact round-trip


class TestPolylineDistance:
    def test_identical(self):
        P = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]])
        assert polyline_distance(P, P) == 0.0

    def test_offset_segments(self):
        P = np.array([[0.0, 0.0], [1.0, 0.0]])
        Q = np.array([[0.0, 0.1], [1.0, 0.1]])
        assert abs(polyline_distance(P, Q) - 0.1) < 1e-12

    def test_projection_onto_segment_interior(self):
        from loxokit.engine import _one_sided_distance
        P = np.array([[0.5, 0.2]])
        Q = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert abs(_one_sided_distance(P, Q) - 0.2) < 1e-12

    def test_parallel_polylines(self):
        P = np.array([[0.0, 0.2], [0.5, 0.2], [1.0, 0.2]])
        Q = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert abs(polyline_distance(P, Q) - 0.2) < 1e-12
