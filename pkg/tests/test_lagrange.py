import numpy as np
import pytest

from tdmech.bundle import JetPoint, RepeatedJetPoint, SecondJetPoint, VerticalPhasePoint
from tdmech.errors import InputError, NoConvergence, SingularLagrangian
from tdmech.lagrange import (
    Lagrangian,
    cartan_residual,
    dynamic_rhs,
    euler_lagrange_residual,
    first_variation,
    integrate_lagrange,
    legendre_invert,
    legendre_map,
    poincare_cartan,
)
from tdmech.expr import parse

from conftest import sample_cube


class TestLegendreMap:
    def test_exponential_metric_momentum(self):
        # pi = e^y v, so at y=0, v=2 the momentum is exactly 2.
        L = Lagrangian.parse("0.5*exp(y1)*v1^2", 1)
        q = legendre_map(L, JetPoint(0.0, [0.0], [2.0]))
        assert q.p[0] == pytest.approx(2.0, abs=1e-15)
        assert q.t == 0.0 and q.y[0] == 0.0

    def test_free_particle_identity(self):
        L = Lagrangian.parse("0.5*(v1^2 + v2^2)", 2)
        j = JetPoint(1.0, [3.0, -1.0], [0.25, -4.0])
        q = legendre_map(L, j)
        assert np.array_equal(q.p, j.v)

    def test_dimension_mismatch(self):
        L = Lagrangian.parse("0.5*v1^2", 1)
        with pytest.raises(InputError):
            legendre_map(L, JetPoint(0.0, [1.0, 2.0], [0.0, 0.0]))

    def test_rejects_momentum_variables(self):
        with pytest.raises(InputError):
            Lagrangian.parse("p1*v1", 1)


class TestLegendreInvert:
    def test_exponential_metric_round_trip(self):
        L = Lagrangian.parse("0.5*exp(y1)*v1^2", 1)
        j = legendre_invert(L, VerticalPhasePoint(0.0, [0.0], [2.0]))
        assert j.v[0] == pytest.approx(2.0, abs=1e-12)

    def test_round_trip_on_curved_kinetic_term(self, rng):
        L = Lagrangian.parse("0.5*exp(y2)*v1^2 + 0.5*v2^2 - cos(y1)", 2)
        for _ in range(20):
            j = JetPoint(rng.uniform(-1, 1), rng.uniform(-1, 1, 2), rng.uniform(-2, 2, 2))
            back = legendre_invert(L, legendre_map(L, j))
            assert np.max(np.abs(back.v - j.v)) < 1e-10

    def test_degenerate_direction_raises(self):
        # No v2 dependence: the velocity Hessian has a zero row.
        L = Lagrangian.parse("0.5*v1^2", 2)
        with pytest.raises((SingularLagrangian, NoConvergence)):
            legendre_invert(L, VerticalPhasePoint(0.0, [0.0, 0.0], [2.0, 1.0]))

    def test_bad_guess_shape(self):
        L = Lagrangian.parse("0.5*v1^2", 1)
        with pytest.raises(InputError):
            legendre_invert(L, VerticalPhasePoint(0.0, [0.0], [1.0]), guess=[1.0, 2.0])


class TestEulerLagrange:
    def test_free_particle_off_shell_value(self):
        # L = v^2/2: residual is dL/dy - d/dt(pi) = 0 - a.
        L = Lagrangian.parse("0.5*v1^2", 1)
        r = euler_lagrange_residual(L, SecondJetPoint(0.0, [0.0], [1.0], [2.0]))
        assert r[0] == pytest.approx(-2.0, abs=1e-12)

    def test_oscillator_on_shell(self):
        L = Lagrangian.parse("0.5*v1^2 - 0.5*y1^2", 1)
        r = euler_lagrange_residual(L, SecondJetPoint(0.0, [1.0], [0.0], [-1.0]))
        assert abs(r[0]) < 1e-14

    def test_matches_direct_total_derivative(self, rng):
        # Oracle: finite-difference d/dt of pi along the curve implied by (v, a).
        L = Lagrangian.parse("0.5*exp(y2)*v1^2 + 0.5*v2^2 + sin(t)*y1", 2)
        for _ in range(10):
            t = rng.uniform(-1, 1)
            y = rng.uniform(-1, 1, 2)
            v = rng.uniform(-1, 1, 2)
            a = rng.uniform(-1, 1, 2)
            r = euler_lagrange_residual(L, SecondJetPoint(t, y, v, a))
            h = 1e-6
            pi_plus = legendre_map(
                L, JetPoint(t + h, y + h * v + 0.5 * h * h * a, v + h * a)
            ).p
            pi_minus = legendre_map(
                L, JetPoint(t - h, y - h * v + 0.5 * h * h * a, v - h * a)
            ).p
            grad_y = np.array(
                [
                    L.expr.gradient(("y1", "y2"), {"t": t, "y1": y[0], "y2": y[1], "v1": v[0], "v2": v[1]})
                ]
            ).ravel()
            oracle = grad_y - (pi_plus - pi_minus) / (2 * h)
            assert np.max(np.abs(r - oracle)) < 1e-6


class TestDynamicRhs:
    def test_oscillator_restoring_force(self):
        L = Lagrangian.parse("0.5*v1^2 - 0.5*y1^2", 1)
        a = dynamic_rhs(L, JetPoint(0.0, [2.0], [0.0]))
        assert a[0] == pytest.approx(-2.0, abs=1e-14)

    def test_consistency_with_residual(self, rng):
        L = Lagrangian.parse("0.5*exp(y2)*v1^2 + 0.5*v2^2 - cos(y1) + t*y2", 2)
        for _ in range(10):
            j = JetPoint(rng.uniform(-1, 1), rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
            a = dynamic_rhs(L, j)
            r = euler_lagrange_residual(L, SecondJetPoint(j.t, j.y, j.v, a))
            assert np.max(np.abs(r)) < 1e-10

    def test_degenerate_raises(self):
        L = Lagrangian.parse("v1*y1", 1)
        with pytest.raises(SingularLagrangian):
            dynamic_rhs(L, JetPoint(0.0, [1.0], [1.0]))


class TestIntegrateLagrange:
    def test_oscillator_against_closed_form(self):
        L = Lagrangian.parse("0.5*v1^2 - 0.5*y1^2", 1)
        path = integrate_lagrange(L, JetPoint(0.0, [1.0], [0.0]), 2 * np.pi, 1e-3)
        assert path.kind == "jet"
        y_exact = np.cos(path.times)
        v_exact = -np.sin(path.times)
        assert np.max(np.abs(path.states[:, 0] - y_exact)) < 1e-9
        assert np.max(np.abs(path.states[:, 1] - v_exact)) < 1e-9

    def test_driven_system_runs(self):
        L = Lagrangian.parse("0.5*v1^2 + sin(t)*y1", 1)
        path = integrate_lagrange(L, JetPoint(0.0, [0.0], [0.0]), 1.0, 1e-3)
        # y'' = sin(t) with rest start: y = t - sin(t).
        y_exact = path.times - np.sin(path.times)
        assert np.max(np.abs(path.states[:, 0] - y_exact)) < 1e-10


class TestCartanResidual:
    def test_reduces_to_euler_lagrange_exactly(self, rng):
        L = Lagrangian.parse("0.5*exp(y2)*v1^2 + 0.5*v2^2 + t*sin(y1)", 2)
        for _ in range(10):
            t = rng.uniform(-1, 1)
            y = rng.uniform(-1, 1, 2)
            v = rng.uniform(-1, 1, 2)
            a = rng.uniform(-1, 1, 2)
            first, second = cartan_residual(L, RepeatedJetPoint(t, y, v, v, a))
            el = euler_lagrange_residual(L, SecondJetPoint(t, y, v, a))
            assert np.array_equal(first, np.zeros(2))
            assert np.array_equal(second, el)

    def test_velocity_gap_blocks(self):
        # L = v^2/2, vhat - v = 1: first block is pi_vv * gap = 1,
        # second is -a + 0 (the gap term has no y-v cross derivatives).
        L = Lagrangian.parse("0.5*v1^2", 1)
        first, second = cartan_residual(
            L, RepeatedJetPoint(0.0, [0.0], [1.0], [2.0], [3.0])
        )
        assert first[0] == pytest.approx(1.0, abs=1e-15)
        assert second[0] == pytest.approx(-3.0, abs=1e-15)

    def test_gap_term_feels_cross_derivatives(self):
        # L = y v: pi = y, EL residual = v - vhat; gap adds (vhat - v).
        # Both blocks vanish identically despite the degeneracy.
        L = Lagrangian.parse("y1*v1", 1)
        first, second = cartan_residual(
            L, RepeatedJetPoint(0.5, [2.0], [1.0], [4.0], [7.0])
        )
        assert first[0] == 0.0
        assert second[0] == pytest.approx(0.0, abs=1e-14)


class TestPoincareCartan:
    def test_free_particle(self):
        L = Lagrangian.parse("0.5*v1^2", 1)
        pi, energy = poincare_cartan(L, JetPoint(0.0, [0.0], [3.0]))
        assert pi[0] == pytest.approx(3.0)
        assert energy == pytest.approx(4.5)

    def test_energy_is_legendre_pairing_minus_value(self, rng):
        L = Lagrangian.parse("0.5*exp(y1)*v1^2 - cos(y1) + t*v1", 1)
        for _ in range(10):
            j = JetPoint(rng.uniform(-1, 1), rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 1))
            pi, energy = poincare_cartan(L, j)
            value = L.expr.evaluate({"t": j.t, "y1": j.y[0], "v1": j.v[0]})
            assert energy == pytest.approx(float(pi @ j.v) - value, abs=1e-13)


class TestFirstVariation:
    def test_split_is_exact_identity(self, rng):
        L = Lagrangian.parse("0.5*exp(y2)*v1^2 + 0.5*v2^2 - cos(y1) + t*y2", 2)
        u = (parse("sin(y1)"), parse("t*y2"))
        for _ in range(25):
            s = SecondJetPoint(
                rng.uniform(-1, 1),
                rng.uniform(-1, 1, 2),
                rng.uniform(-1, 1, 2),
                rng.uniform(-1, 1, 2),
            )
            for u_t in (0.0, 1.0):
                variation, eq_term, boundary = first_variation(L, u_t, u, s)
                assert variation == pytest.approx(eq_term + boundary, abs=1e-12)

    def test_bulk_term_vanishes_on_shell(self):
        L = Lagrangian.parse("0.5*v1^2 - 0.5*y1^2", 1)
        s = SecondJetPoint(0.3, [1.0], [0.5], [-1.0])
        variation, eq_term, boundary = first_variation(L, 0.0, (parse("y1^2"),), s)
        assert abs(eq_term) < 1e-14
        assert variation == pytest.approx(boundary, abs=1e-13)

    def test_time_translation_of_autonomous_system(self):
        # u_t = 1, u = v-less zero field: variation reduces to dL/dt = 0
        # and the boundary term is minus the energy rate.
        L = Lagrangian.parse("0.5*v1^2 - 0.5*y1^2", 1)
        s = SecondJetPoint(0.0, [1.0], [2.0], [-1.0])
        variation, eq_term, boundary = first_variation(L, 1.0, (parse("0"),), s)
        assert variation == pytest.approx(0.0, abs=1e-15)
        # energy = (v^2 + y^2)/2, rate = v a + y v = -2 + 2 = 0 on shell.
        assert boundary == pytest.approx(0.0, abs=1e-14)
        assert eq_term == pytest.approx(0.0, abs=1e-14)

    def test_rejects_velocity_dependent_field(self):
        L = Lagrangian.parse("0.5*v1^2", 1)
        s = SecondJetPoint(0.0, [0.0], [0.0], [0.0])
        with pytest.raises(InputError):
            first_variation(L, 0.0, (parse("v1"),), s)

    def test_rejects_fractional_time_component(self):
        L = Lagrangian.parse("0.5*v1^2", 1)
        s = SecondJetPoint(0.0, [0.0], [0.0], [0.0])
        with pytest.raises(InputError):
            first_variation(L, 0.5, (parse("y1"),), s)
