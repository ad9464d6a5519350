import math
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from ermakov_lab.constants import ReducedForm
from ermakov_lab.utils import dumps, format_float, normalize_value, quadrant_center, write_csv


class TestNormalizeValue(SimpleTestCase):
    def test_scalars(self):
        self.assertIs(normalize_value(np.bool_(True)), True)
        self.assertEqual(normalize_value(np.int64(3)), 3)
        self.assertIsInstance(normalize_value(np.float64(0.5)), float)
        self.assertEqual(normalize_value(Fraction(-1, 3)), "-1/3")
        self.assertIsNone(normalize_value(math.nan))
        self.assertIsNone(normalize_value(-math.inf))

    def test_containers(self):
        value = {ReducedForm.PAPER_2_4: np.array([1.0, math.inf]), 2: (1, 2)}
        self.assertEqual(normalize_value(value), {"paper_2_4": [1.0, None], "2": [1, 2]})

    def test_dumps_is_stable(self):
        self.assertEqual(dumps({"b": 1, "a": [0.1]}), '{\n  "a": [\n    0.1\n  ],\n  "b": 1\n}\n')


class TestFormatting(SimpleTestCase):
    def test_format_float(self):
        self.assertEqual(format_float(0.1), "0.10000000000000001")
        self.assertEqual(format_float(2.0), "2")
        self.assertEqual(format_float(np.float64(1e-20)), "9.9999999999999995e-21")

    def test_write_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(Path(tmp) / "rows.csv", ("name", "value"), [("a", 0.5), ("b", 3)])
            self.assertEqual(path.read_bytes(), b"name,value\na,0.5\nb,3\n")


class TestQuadrantCenter(SimpleTestCase):
    def test_quadrants(self):
        self.assertEqual(quadrant_center(0.3), math.pi / 4)
        self.assertAlmostEqual(quadrant_center(2.0), 3.0 * math.pi / 4, delta=1e-15)
        self.assertAlmostEqual(quadrant_center(-0.3), -math.pi / 4, delta=1e-15)
