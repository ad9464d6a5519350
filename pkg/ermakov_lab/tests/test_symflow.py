import math

import numpy as np
from django.test import SimpleTestCase

from ermakov_lab.constants import Part
from ermakov_lab.generators import corrected_catalogue, gamma2, gamma3, parse_generator
from ermakov_lab.integrate import integrate_cart
from ermakov_lab.reduce import AngularLaw, reduce_trajectory
from ermakov_lab.symexpr import GeneratorSym
from ermakov_lab.symflow import (
    PULLBACK_HEADER,
    GeneratorNum,
    ReferenceSolution,
    corrupt,
    flow_map,
    induced_original_variables,
    oscillator_defect,
    paper_columns,
    time_translation_check,
    verify_solution_mapping,
)
from ermakov_lab.systems import CartState, SystemSpec

GENERALIZED = SystemSpec.from_strings("generalized", f="1", g="1")
START = CartState(0.0, 1.0, 2.0, 0.3, -0.1)
REFERENCE = ReferenceSolution(samples=61)
EPSILONS = (0.01, 0.1)
# a 10% coefficient error moves the image off the solution set by O(epsilon)
CONTROL_FLOOR = {0.01: 1e-5, 0.1: 1e-3}


def numeric(text: str, part: Part = Part.REAL, label: str = "") -> GeneratorNum:
    return GeneratorNum.from_symbolic(parse_generator(text), part, label)


class TestGeneratorNum(SimpleTestCase):
    def test_real_and_imaginary_parts(self):
        text = "exp(sqrt2*i*th)*d_u1"
        theta = 0.7
        re = numeric(text, Part.REAL)
        im = numeric(text, Part.IMAG)
        np.testing.assert_allclose(re.vector(theta, 1.0, 1.0), [0.0, math.cos(math.sqrt(2.0) * theta), 0.0])
        np.testing.assert_allclose(im.vector(theta, 1.0, 1.0), [0.0, math.sin(math.sqrt(2.0) * theta), 0.0])

    def test_name(self):
        self.assertEqual(numeric("d_th", Part.IMAG, "G2").name, "G2:im")
        self.assertEqual(numeric("u1*d_u1").label, "(u1)*d_u1")
        self.assertTrue(GeneratorNum.from_symbolic(GeneratorSym()).is_zero)


class TestFlowMap(SimpleTestCase):
    def test_zero_epsilon_is_identity(self):
        point = np.array([0.3, 1.2, 0.8])
        np.testing.assert_array_equal(flow_map(numeric("u1^2*d_u1"), point, 0.0), point)

    def test_closed_form_flows(self):
        np.testing.assert_allclose(
            flow_map(numeric("d_th"), (0.3, 1.0, 1.0), 0.5), [0.8, 1.0, 1.0], atol=1e-10
        )
        np.testing.assert_allclose(
            flow_map(numeric("u1*d_u1"), (0.3, 1.5, 1.0), -0.4),
            [0.3, 1.5 * math.exp(-0.4), 1.0],
            atol=1e-10,
        )

    def test_group_property(self):
        g = GeneratorNum.from_symbolic(corrected_catalogue()["G8+"], Part.REAL, "G8+")
        point = (0.4, 0.9, 1.0)
        composed = flow_map(g, flow_map(g, point, 0.2), 0.3)
        np.testing.assert_allclose(composed, flow_map(g, point, 0.5), atol=1e-9)
        np.testing.assert_allclose(flow_map(g, flow_map(g, point, 0.3), -0.3), point, atol=1e-9)


class TestOscillatorDefect(SimpleTestCase):
    def test_exact_solution(self):
        theta, u1, _ = ReferenceSolution().sample()
        self.assertLess(oscillator_defect(theta, u1).max(), 1e-9)

    def test_non_solution(self):
        theta = np.linspace(0.0, 2.0, 101)
        # (th^2)'' + 2 th^2 = 2 + 2 th^2 once the oscillator part is removed
        self.assertGreater(oscillator_defect(theta, theta ** 2).max(), 1e-2)

    def test_reference_needs_a_fit_window(self):
        with self.assertRaises(ValueError):
            ReferenceSolution(samples=5).sample()


class TestVerifySolutionMapping(SimpleTestCase):
    def test_corrected_catalogue_maps_solutions_to_solutions(self):
        for name, generator in corrected_catalogue().items():
            parts = [Part.REAL]
            if generator.conjugate() != generator:
                parts.append(Part.IMAG)
            for part in parts:
                g = GeneratorNum.from_symbolic(generator, part, name)
                for epsilon in EPSILONS:
                    with self.subTest(name=name, part=part, epsilon=epsilon):
                        result = verify_solution_mapping(g, epsilon, 1e-6, REFERENCE)
                        self.assertTrue(result.passed, result.as_dict())

    def test_corrupted_controls_fail(self):
        for name in ("G4+", "G6+", "G8-"):
            g = GeneratorNum.from_symbolic(corrupt(name), Part.REAL, name)
            for epsilon in EPSILONS:
                with self.subTest(name=name, epsilon=epsilon):
                    result = verify_solution_mapping(g, epsilon, 1e-6, REFERENCE)
                    self.assertTrue(result.monotone)
                    self.assertFalse(result.passed)
                    self.assertGreater(result.max_defect, CONTROL_FLOOR[epsilon])

    def test_nonlinear_control_fails(self):
        for epsilon in EPSILONS:
            with self.subTest(epsilon=epsilon):
                result = verify_solution_mapping(numeric("u1^2*d_u1"), epsilon, 1e-6, REFERENCE)
                self.assertFalse(result.passed)
                self.assertGreater(result.max_defect, 10.0 * CONTROL_FLOOR[epsilon])
                self.assertEqual(result.u2_spread, 0.0)

    def test_control_defect_is_first_order_in_epsilon(self):
        controls = [
            GeneratorNum.from_symbolic(corrupt(name), Part.REAL, name)
            for name in ("G4+", "G6+", "G8-")
        ]
        controls.append(numeric("u1^2*d_u1"))
        for g in controls:
            with self.subTest(name=g.name):
                large, small = (
                    verify_solution_mapping(g, epsilon, 1e-6, REFERENCE).max_defect
                    for epsilon in (0.1, 0.01)
                )
                self.assertGreater(large / small, 5.0)
                self.assertLess(large / small, 20.0)

    def test_non_monotone_image(self):
        # th -> th + u1(th) folds back where u1' < -1
        result = verify_solution_mapping(numeric("u1*d_th"), 1.0, 1e-6, REFERENCE)
        self.assertFalse(result.monotone)
        self.assertFalse(result.passed)
        self.assertIsNone(result.as_dict()["max_defect"])

    def test_unknown_control(self):
        with self.assertRaises(ValueError):
            corrupt("G1")


class TestPullback(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        traj = integrate_cart(GENERALIZED, START, 2.0)
        cls.rt = reduce_trajectory(traj, 60)
        cls.law = AngularLaw.from_trajectory(traj)

    def test_scaling_of_u1(self):
        g = GeneratorNum.from_symbolic(gamma3(), Part.REAL, "G3")
        report = induced_original_variables(g, self.rt, self.law)
        np.testing.assert_allclose(report.dr_derived, -self.rt.r, rtol=1e-12)
        np.testing.assert_array_equal(report.dt_local, np.zeros_like(self.rt.t))
        # N' th' = -2 along any orbit, so dt = -2 (t - t_start)
        np.testing.assert_allclose(
            report.dt_nonlocal, -2.0 * (self.rt.t - self.rt.t[0]), atol=1e-8
        )
        self.assertLess(report.nonlocal_crosscheck, 1e-8)
        np.testing.assert_allclose(report.dr_paper, -1.0 / self.rt.r ** 3)

    def test_theta_translation(self):
        g = GeneratorNum.from_symbolic(gamma2(), Part.REAL, "G2")
        report = induced_original_variables(g, self.rt)
        np.testing.assert_allclose(report.dt_local, self.rt.r ** 2 / self.rt.L)
        np.testing.assert_array_equal(report.dr_derived, np.zeros_like(self.rt.t))
        np.testing.assert_allclose(report.dt_paper, self.rt.L / self.rt.r ** 2)
        self.assertLess(report.nonlocal_crosscheck, 1e-8)

    def test_theta_translation_splits_into_local_and_nonlocal_parts(self):
        # f = g = 0 and no H: free motion, so L is constant and
        # N' th' = -2 r r' / L integrates to -(r^2 - r_start^2) / L
        spec = SystemSpec.from_strings("kepler_ermakov", f="0", g="0")
        traj = integrate_cart(spec, START, 2.0)
        rt = reduce_trajectory(traj, 40)
        g = GeneratorNum.from_symbolic(gamma2(), Part.REAL, "G2")
        report = induced_original_variables(g, rt)
        L = rt.L[0]
        np.testing.assert_allclose(rt.L, L, rtol=1e-9)
        np.testing.assert_allclose(report.dt_local, rt.r ** 2 / rt.L, rtol=1e-12)
        np.testing.assert_allclose(
            report.dt_nonlocal, -(rt.r ** 2 - rt.r[0] ** 2) / L, rtol=0, atol=1e-8
        )
        # together a pure time translation
        np.testing.assert_allclose(report.dt_derived, rt.r[0] ** 2 / L, rtol=0, atol=1e-8)
        summary = report.summary()
        self.assertAlmostEqual(
            summary["max_abs_dt_nonlocal"], np.abs(report.dt_nonlocal).max(), delta=1e-15
        )
        self.assertGreater(summary["max_abs_dt_nonlocal"], 0.1)

    def test_rows_and_summary(self):
        g = numeric("u1^2*d_u1")
        report = induced_original_variables(g, self.rt, self.law)
        rows = report.rows()
        self.assertEqual(len(rows), 60)
        self.assertEqual(len(rows[0]), len(PULLBACK_HEADER))
        self.assertTrue(math.isnan(rows[0][5]))
        self.assertEqual(report.summary()["nodes"], 60)

    def test_paper_columns(self):
        zero = GeneratorNum.from_symbolic(GeneratorSym(), Part.REAL, "G4+")
        self.assertEqual(paper_columns(zero, GENERALIZED, self.law, 1.0, 1.0, 1.0), (0.0, 0.0))
        g4 = GeneratorNum.from_symbolic(corrected_catalogue()["G4+"], Part.IMAG, "G4+")
        dt, dr = paper_columns(g4, GENERALIZED, self.law, 0.5, 2.0, 1.0)
        self.assertEqual(dt, 0.0)
        self.assertAlmostEqual(dr, -math.sin(math.sqrt(2.0) * 0.5) / 4.0, delta=1e-15)


class TestTimeTranslation(SimpleTestCase):
    def test_constant_frequency(self):
        spec = SystemSpec.from_strings("toy", w="1")
        report = time_translation_check(spec, START, 5.0)
        self.assertTrue(report.w_constant)
        self.assertTrue(report.holds)
        self.assertEqual(report.as_dict()["shift"], 0.5)

    def test_time_dependent_frequency(self):
        spec = SystemSpec.from_strings("toy", w="sqrt(1 + 0.5*sin(t))")
        report = time_translation_check(spec, START, 5.0)
        self.assertFalse(report.w_constant)
        self.assertFalse(report.holds)
        self.assertGreater(report.max_deviation, 1e-3)
