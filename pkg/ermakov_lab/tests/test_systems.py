import math

import numpy as np
from django.test import SimpleTestCase

from ermakov_lab.constants import PrimeReading, SystemClass
from ermakov_lab.exceptions import SingularConfigurationError, SpecValidationError
from ermakov_lab.systems import (
    CartState,
    PolarState,
    SystemSpec,
    cart_forcing,
    cart_rhs,
    ermakov_invariant,
    from_polar,
    paper_residual,
    phi,
    polar_rhs_derived,
    polar_rhs_paper,
    rotate,
    to_polar,
)

TOY = SystemSpec.from_strings("toy")
GENERALIZED = SystemSpec.from_strings("generalized", f="1", g="1")
KEPLER = SystemSpec.from_strings("kepler_ermakov", f="1", g="1")


class TestSystemSpec(SimpleTestCase):
    def test_class_is_coerced(self):
        self.assertIs(TOY.system_class, SystemClass.TOY)

    def test_unknown_class(self):
        with self.assertRaisesMessage(SpecValidationError, "unknown system class 'ermakov'"):
            SystemSpec.from_strings("ermakov")

    def test_toy_rejects_shape_functions(self):
        with self.assertRaisesMessage(SpecValidationError, "do not use: f, C"):
            SystemSpec.from_strings("toy", f="1", C=0.0)

    def test_generalized_rejects_h_and_C(self):
        with self.assertRaises(SpecValidationError):
            SystemSpec.from_strings("generalized", f="1", g="1", h="1")

    def test_missing_shape_functions(self):
        with self.assertRaisesMessage(SpecValidationError, "require: g"):
            SystemSpec.from_strings("kepler_ermakov", f="1")

    def test_kepler_defaults(self):
        self.assertTrue(KEPLER.h.is_zero())
        self.assertEqual(KEPLER.C, 0.0)

    def test_zero_frequency(self):
        self.assertTrue(TOY.has_zero_frequency())
        self.assertFalse(SystemSpec.from_strings("toy", w="1").has_zero_frequency())
        self.assertEqual(SystemSpec.from_strings("toy", w="2").w_squared(0.0), 4.0)


class TestCartesian(SimpleTestCase):
    def test_toy_forcing(self):
        self.assertEqual(cart_forcing(TOY, 0.0, 1.0, 2.0), (1.0, 0.125))

    def test_generalized_forcing(self):
        spec = SystemSpec.from_strings("generalized", f="s", g="2")
        # f(y/x) / (y x^2), g(y/x) / (x y^2)
        self.assertEqual(cart_forcing(spec, 0.0, 1.0, 2.0), (1.0, 0.5))

    def test_kepler_forcing_includes_H(self):
        spec = SystemSpec.from_strings("kepler_ermakov", f="0", g="0", C=4.0)
        # H = C r^3 / 4 = r^3, applied as -(x / r^3) H
        fx, fy = cart_forcing(spec, 0.0, 3.0, 4.0)
        self.assertAlmostEqual(fx, -3.0, delta=1e-14)
        self.assertAlmostEqual(fy, -4.0, delta=1e-14)

    def test_frequency_term(self):
        spec = SystemSpec.from_strings("toy", w="t")
        state = CartState(2.0, 1.0, 1.0, 0.0, 0.0)
        self.assertEqual(cart_rhs(spec, state), (1.0 - 4.0, 1.0 - 4.0))

    def test_singular_configuration(self):
        with self.assertRaises(SingularConfigurationError):
            cart_forcing(TOY, 0.0, 0.0, 1.0)


class TestPolar(SimpleTestCase):
    def test_conversion(self):
        state = CartState(0.5, 1.0, 2.0, 0.3, -0.1)
        p = to_polar(state)
        self.assertAlmostEqual(p.r, math.sqrt(5.0), delta=1e-15)
        self.assertAlmostEqual(p.angular_momentum, state.angular_momentum, delta=1e-15)
        self.assertAlmostEqual(state.angular_momentum, -0.7, delta=1e-15)
        np.testing.assert_allclose(
            from_polar(p).as_array(), state.as_array(), rtol=0, atol=1e-15
        )
        self.assertEqual(from_polar(p).t, 0.5)

    def test_origin_has_no_polar_form(self):
        with self.assertRaises(SingularConfigurationError):
            to_polar(CartState(0.0, 0.0, 0.0, 1.0, 0.0))

    def test_derived_equations_rotate_cartesian_accelerations(self):
        spec = SystemSpec.from_strings(
            "kepler_ermakov", w="1 + t", f="1 + s^2", g="2", h="s", C=0.5
        )
        state = CartState(0.3, 1.2, 0.7, -0.2, 0.4)
        p = to_polar(state)
        accel = polar_rhs_derived(spec, p)
        ax, ay = cart_rhs(spec, state)
        # x'' = (r'' - r th'^2) cos - (r th'' + 2 r' th') sin
        radial = accel.rdd - p.r * p.omega ** 2
        transversal = p.r * accel.thdd + 2.0 * p.vr * p.omega
        cos, sin = math.cos(p.theta), math.sin(p.theta)
        self.assertAlmostEqual(radial * cos - transversal * sin, ax, delta=1e-12)
        self.assertAlmostEqual(radial * sin + transversal * cos, ay, delta=1e-12)

    def test_rotation_identity_on_random_states(self):
        specs = [
            TOY,
            GENERALIZED,
            KEPLER,
            SystemSpec.from_strings("toy", w="1 + 0.5*sin(t)"),
            SystemSpec.from_strings("generalized", w="t", f="1 + s^2", g="2 - s"),
            SystemSpec.from_strings("kepler_ermakov", w="1", f="2", g="1 + s", h="s", C=0.5),
        ]
        rng = np.random.default_rng(11)
        for spec in specs:
            with self.subTest(spec=str(spec.system_class), w=str(spec.w)):
                for _ in range(100):
                    x, y = rng.uniform(0.5, 2.0, 2) * rng.choice((-1.0, 1.0), 2)
                    vx, vy = rng.uniform(-1.0, 1.0, 2)
                    state = CartState(float(rng.uniform(0.0, 2.0)), x, y, vx, vy)
                    p = to_polar(state)
                    accel = polar_rhs_derived(spec, p)
                    radial, transversal = rotate(*cart_rhs(spec, state), p.theta)
                    scale = max(1.0, abs(radial), abs(transversal))
                    self.assertAlmostEqual(
                        accel.rdd - p.r * p.omega ** 2, radial, delta=1e-12 * scale
                    )
                    self.assertAlmostEqual(
                        p.r * accel.thdd + 2.0 * p.vr * p.omega, transversal, delta=1e-12 * scale
                    )

    def test_toy_is_the_plain_kepler_ermakov_case(self):
        rng = np.random.default_rng(12)
        for w in ("0", "1 + t"):
            toy = SystemSpec.from_strings("toy", w=w)
            kepler = SystemSpec.from_strings("kepler_ermakov", w=w, f="1", g="1")
            with self.subTest(w=w):
                for _ in range(100):
                    x, y = rng.uniform(0.3, 3.0, 2) * rng.choice((-1.0, 1.0), 2)
                    vx, vy = rng.uniform(-1.0, 1.0, 2)
                    state = CartState(float(rng.uniform(0.0, 2.0)), x, y, vx, vy)
                    self.assertEqual(cart_rhs(toy, state), cart_rhs(kepler, state))


class TestPrintedPolarForms(SimpleTestCase):
    point = PolarState(0.0, 1.7, math.pi / 3, 0.2, -0.4)

    def test_kepler_ermakov_matches(self):
        spec = SystemSpec.from_strings("kepler_ermakov", f="1 + s", g="2", h="1")
        printed, derived = paper_residual(spec, self.point)
        self.assertAlmostEqual(printed.rdd_residual, 0.0, delta=1e-12)
        self.assertAlmostEqual(printed.thdd_residual, 0.0, delta=1e-12)
        self.assertAlmostEqual(printed.rdd, derived.rdd, delta=1e-12)

    def test_kepler_ermakov_omits_frequency(self):
        spec = SystemSpec.from_strings("kepler_ermakov", w="1", f="1", g="1")
        printed = polar_rhs_paper(spec, self.point)
        # the derived radial equation carries -w^2 r
        self.assertAlmostEqual(printed.rdd_residual, self.point.r, delta=1e-12)

    def test_generalized_forms_are_inconsistent(self):
        printed = polar_rhs_paper(GENERALIZED, self.point)
        # r^3 times the radial: sec^2 + cosec^2 printed, 2 / (sin cos) derived
        expected = (16.0 / 3.0 - 8.0 / math.sqrt(3.0)) / self.point.r ** 3
        self.assertAlmostEqual(printed.rdd_residual, expected, delta=1e-12)
        # r^3 times the transversal: -32 sqrt3 / 9 printed, 4/3 - 4 derived
        expected = (-32.0 * math.sqrt(3.0) / 9.0 + 8.0 / 3.0) / self.point.r ** 4
        self.assertAlmostEqual(printed.thdd_residual, expected, delta=1e-12)
        self.assertFalse(printed.consistent)

    def test_toy_radial_matches(self):
        printed = polar_rhs_paper(TOY, self.point)
        self.assertAlmostEqual(printed.rdd_residual, 0.0, delta=1e-12)

    def test_toy_transversal_depends_on_prime_reading(self):
        as_printed = polar_rhs_paper(TOY, self.point, PrimeReading.AS_PRINTED)
        squared = polar_rhs_paper(TOY, self.point, PrimeReading.SQUARED)
        self.assertGreater(abs(as_printed.thdd_residual), 1e-3)
        self.assertAlmostEqual(squared.thdd_residual, 0.0, delta=1e-12)

    def test_trigonometric_pole(self):
        with self.assertRaises(SingularConfigurationError):
            polar_rhs_paper(TOY, PolarState(0.0, 1.0, 0.0, 0.0, 1.0))


class TestInvariant(SimpleTestCase):
    def test_toy_value(self):
        state = CartState(0.0, 1.0, 2.0, 0.3, -0.1)
        self.assertAlmostEqual(ermakov_invariant(TOY, state), 2.37, delta=1e-14)

    def test_kepler_potential_reproduces_toy(self):
        for s in (0.5, 2.0, -3.0):
            with self.subTest(s=s):
                self.assertAlmostEqual(phi(KEPLER, s), phi(TOY, s), delta=1e-9)

    def test_generalized_potential(self):
        # integral of 2 (1 - 1/sigma^2) from 1
        self.assertAlmostEqual(phi(GENERALIZED, 2.0), 1.0, delta=1e-10)

    def test_singular_configuration(self):
        with self.assertRaises(SingularConfigurationError):
            ermakov_invariant(TOY, CartState(0.0, 1.0, 0.0, 0.0, 1.0))
