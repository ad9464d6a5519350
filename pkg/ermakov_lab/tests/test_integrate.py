import math

import numpy as np
from django.test import SimpleTestCase

from ermakov_lab.exceptions import (
    QuadraturePoleError,
    RootFindingError,
    SingularityError,
    TurningPointError,
)
from ermakov_lab.integrate import (
    angle_near,
    check_theta_monotone,
    integrate_cart,
    integrate_polar,
    quadrature,
    resample_by_theta,
    time_at_theta,
)
from ermakov_lab.systems import CartState, SystemSpec, to_polar

TOY = SystemSpec.from_strings("toy")
GENERALIZED = SystemSpec.from_strings("generalized", f="1", g="1")
START = CartState(0.0, 1.0, 2.0, 0.3, -0.1)
DIAGONAL = CartState(0.0, 1.0, 1.0, 0.0, 0.0)


class TestIntegrateCart(SimpleTestCase):
    def test_closed_form_diagonal_orbit(self):
        traj = integrate_cart(TOY, DIAGONAL, 10.0, rtol=1e-12, atol=1e-12)
        error = np.abs(traj.states[:, 0] - np.sqrt(1.0 + traj.t ** 2))
        self.assertLess(error.max(), 1e-8)
        self.assertEqual(traj.t[-1], 10.0)
        self.assertFalse(traj.terminated_early)

    def test_tolerance_ladder(self):
        tolerances = (1e-5, 1e-7, 1e-9, 1e-11)
        errors, steps = [], []
        for tol in tolerances:
            traj = integrate_cart(TOY, DIAGONAL, 10.0, rtol=tol, atol=tol)
            errors.append(np.abs(traj.states[:, 0] - np.sqrt(1.0 + traj.t ** 2)).max())
            steps.append(traj.stats.steps)
        for looser, tighter in zip(errors, errors[1:]):
            self.assertLessEqual(tighter, looser, msg=errors)
        # error ~ h^p with h ~ 1 / steps
        order = math.log(errors[0] / errors[-1]) / math.log(steps[-1] / steps[0])
        self.assertGreaterEqual(order, 4.0)

    def test_dense_output_between_nodes(self):
        traj = integrate_cart(TOY, DIAGONAL, 10.0, rtol=1e-12, atol=1e-12)
        t = 0.5 * (traj.t[3] + traj.t[4])
        self.assertAlmostEqual(traj.state_at(t).x, math.sqrt(1.0 + t * t), delta=1e-8)
        self.assertEqual(traj.state_at(traj.t[3]), traj.sample(3))
        with self.assertRaises(ValueError):
            traj.state_at(11.0)

    def test_invariant_conserved_with_time_dependent_frequency(self):
        spec = SystemSpec.from_strings("toy", w="sqrt(1 + 0.5*sin(t))")
        traj = integrate_cart(spec, START, 20.0)
        invariant = traj.invariant_series()
        self.assertAlmostEqual(invariant[0], 2.37, delta=1e-12)
        drift = np.abs(invariant - invariant[0]).max() / invariant[0]
        self.assertLess(drift, 1e-7)
        self.assertAlmostEqual(traj.invariant_at(len(traj) - 1), invariant[-1], delta=1e-12)

    def test_invariant_conserved_for_generalized_class(self):
        spec = SystemSpec.from_strings("generalized", w="1", f="1 + s^2", g="1")
        traj = integrate_cart(spec, START, 5.0)
        invariant = traj.invariant_series()
        self.assertLess(np.abs(invariant - invariant[0]).max(), 1e-7)

    def test_cartesian_and_polar_agree(self):
        traj = integrate_cart(GENERALIZED, START, 5.0, rtol=1e-12, atol=1e-12)
        polar = integrate_polar(GENERALIZED, to_polar(START), 5.0, rtol=1e-12, atol=1e-12)
        deviation = max(
            np.linalg.norm(polar.cart_state_at(t).as_array() - traj.states[i])
            for i, t in enumerate(traj.t)
        )
        self.assertLess(deviation, 1e-8)

    def test_singularity_guard(self):
        # f = g = 0, w = 1: x = y = cos(t) reaches the singular rays at pi/2
        spec = SystemSpec.from_strings("generalized", w="1", f="0", g="0")
        traj = integrate_cart(spec, DIAGONAL, 3.0)
        self.assertTrue(traj.terminated_early)
        self.assertAlmostEqual(traj.singular_at, math.pi / 2, delta=1e-6)
        early = traj.t < 1.5
        np.testing.assert_allclose(
            traj.states[early, 0], np.cos(traj.t[early]), rtol=0, atol=1e-8
        )
        with self.assertRaises(SingularityError):
            traj.raise_for_singularity()

    def test_stats(self):
        traj = integrate_cart(GENERALIZED, START, 5.0)
        self.assertEqual(traj.stats.steps, len(traj) - 1)
        self.assertGreater(traj.stats.nfev, traj.stats.steps)
        self.assertGreater(traj.stats.min_step, 0.0)
        attempts = (traj.stats.nfev - 2) // 6
        self.assertEqual(traj.stats.rejections_estimate, max(attempts - traj.stats.steps, 0))
        self.assertEqual(traj.accelerations.shape, (len(traj), 2))

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            integrate_cart(TOY, START, 0.0)
        with self.assertRaises(ValueError):
            integrate_cart(TOY, START, 1.0, rtol=0.0)
        with self.assertRaises(SingularityError):
            integrate_cart(TOY, CartState(0.0, 0.0, 1.0, 0.0, 0.0), 1.0)


class TestQuadrature(SimpleTestCase):
    def test_signed_integral(self):
        self.assertAlmostEqual(quadrature(lambda x: x * x, 0.0, 1.0), 1.0 / 3.0, delta=1e-12)
        self.assertAlmostEqual(quadrature(lambda x: x * x, 1.0, 0.0), -1.0 / 3.0, delta=1e-12)
        self.assertEqual(quadrature(math.exp, 2.0, 2.0), 0.0)

    def test_poles(self):
        with self.assertRaises(QuadraturePoleError):
            quadrature(lambda x: 1.0 / x, -1.0, 1.0)
        with self.assertRaises(QuadraturePoleError):
            quadrature(lambda x: math.inf, 0.0, 1.0)


class TestThetaResampling(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.traj = integrate_cart(GENERALIZED, START, 5.0)

    def test_theta_decreases(self):
        self.assertEqual(check_theta_monotone(self.traj), -1.0)

    def test_turning_point(self):
        traj = integrate_cart(TOY, DIAGONAL, 1.0)
        with self.assertRaises(TurningPointError):
            check_theta_monotone(traj)

    def test_time_at_theta(self):
        theta = 0.5 * (self.traj.theta()[0] + self.traj.theta()[-1])
        t = time_at_theta(self.traj, theta)
        state = self.traj.state_at(t)
        self.assertAlmostEqual(math.atan2(state.y, state.x), theta, delta=1e-12)
        with self.assertRaises(RootFindingError):
            time_at_theta(self.traj, 2.0)

    def test_resample(self):
        rt = resample_by_theta(self.traj, 101)
        self.assertEqual(len(rt.theta), 101)
        self.assertEqual(rt.theta[0], self.traj.theta()[0])
        self.assertEqual(rt.theta[-1], self.traj.theta()[-1])
        self.assertTrue(np.all(np.diff(rt.t) > 0))
        self.assertLess(np.abs(rt.kinematic_residual()).max(), 1e-12)
        np.testing.assert_allclose(rt.r, 1.0 / rt.u)
        self.assertAlmostEqual(rt.u_at(rt.theta[50]), rt.u[50], delta=1e-10)

    def test_too_few_samples(self):
        with self.assertRaises(ValueError):
            resample_by_theta(self.traj, 5)

    def test_angle_near(self):
        self.assertAlmostEqual(angle_near(1.0, 0.0, 2.0 * math.pi), 2.0 * math.pi)
        self.assertAlmostEqual(angle_near(-1.0, -1e-9, 3.0), math.pi, delta=1e-8)


class TestThetaDerivatives(SimpleTestCase):
    """
    The pointwise u_theta and u_theta_theta against finite differences of
    u on the resampled grid.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        traj = integrate_cart(GENERALIZED, START, 5.0, rtol=1e-12, atol=1e-12)
        cls.rt = resample_by_theta(traj, 401)

    def test_first_derivative(self):
        rt = self.rt
        estimate = np.gradient(rt.u, rt.theta, edge_order=2)
        scale = np.abs(rt.u_theta).max()
        np.testing.assert_allclose(rt.u_theta[1:-1], estimate[1:-1], rtol=0, atol=1e-4 * scale)

    def test_second_derivative(self):
        rt = self.rt
        h = rt.theta[1] - rt.theta[0]
        estimate = (rt.u[2:] - 2.0 * rt.u[1:-1] + rt.u[:-2]) / (h * h)
        scale = np.abs(rt.u_theta_theta).max()
        np.testing.assert_allclose(
            rt.u_theta_theta[1:-1], estimate, rtol=0, atol=1e-4 * scale
        )

    def test_second_derivative_from_first(self):
        rt = self.rt
        estimate = np.gradient(rt.u_theta, rt.theta, edge_order=2)
        scale = np.abs(rt.u_theta_theta).max()
        np.testing.assert_allclose(
            rt.u_theta_theta[1:-1], estimate[1:-1], rtol=0, atol=1e-4 * scale
        )
