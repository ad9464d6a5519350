from fractions import Fraction

from django.test import SimpleTestCase

from ermakov_lab.exact import I, SQRT2
from ermakov_lab.exceptions import GeneratorSyntaxError, UnknownIdentifierError
from ermakov_lab.generators import (
    CATALOGUE_NAMES,
    DEFAULT_ANSATZE,
    corrected_catalogue,
    corrupted_catalogue,
    gamma1,
    gamma2,
    gamma3,
    gamma6,
    parse_ansatz,
    parse_generator,
    printed_catalogue,
    resolve,
)
from ermakov_lab.symexpr import (
    U1,
    U2,
    GeneratorSym,
    SymExpr,
    solve_coefficients,
    symmetry_residual,
)


class TestGeneratorLanguage(SimpleTestCase):
    def test_basis_fields(self):
        self.assertEqual(parse_generator("d_th"), gamma2())
        self.assertEqual(parse_generator("u1*d_u1"), gamma3())
        self.assertEqual(parse_generator("2*u1*d_u1 + u2*d_u2"), gamma1())

    def test_exponential_coefficients(self):
        parsed = parse_generator("exp(2*sqrt2*i*th)*(d_th + sqrt2*i*u1*d_u1)")
        self.assertEqual(parsed, gamma6(1, SQRT2 * I))
        parsed = parse_generator("exp(-(2*sqrt2*i)*th)*(d_th - sqrt2*i*u1*d_u1)")
        self.assertEqual(parsed, gamma6(-1, SQRT2 * I))

    def test_powers_and_decimals(self):
        parsed = parse_generator("0.5*u1^2*d_u1")
        self.assertEqual(parsed.eta1, SymExpr.symbol(U1) ** 2 * Fraction(1, 2))
        self.assertTrue(parsed.xi.is_zero())

    def test_ansatz_unknowns(self):
        ansatz = parse_ansatz("d_th + a*u1*d_u1 - b*u2*d_u2", ["a", "b"])
        self.assertEqual(ansatz.unknowns, ("a", "b"))
        self.assertEqual(ansatz.base, gamma2())
        self.assertEqual(dict(ansatz.parts)["a"], gamma3())
        self.assertEqual(dict(ansatz.parts)["b"], GeneratorSym(eta2=-SymExpr.symbol(U2)))

    def test_syntax_errors(self):
        cases = {
            "d_th*d_u1": 4,
            "u1": 0,
            "th*d_th": 0,
            "exp(th*th)*d_th": 6,
            "exp(th + 1)*d_th": 0,
            "u1^1.5*d_u1": 3,
            "exp(th^2)*d_th": 6,
            "d_th +": 6,
        }
        for text, position in cases.items():
            with self.subTest(text=text):
                with self.assertRaises(GeneratorSyntaxError) as cm:
                    parse_generator(text)
                self.assertEqual(cm.exception.position, position)

    def test_unknowns_must_be_linear(self):
        with self.assertRaisesMessage(GeneratorSyntaxError, "unknowns must appear linearly"):
            parse_ansatz("c*c*d_u1", ["c"])
        with self.assertRaisesMessage(GeneratorSyntaxError, "unknowns must appear linearly"):
            parse_ansatz("c^2*d_u1", ["c"])

    def test_undeclared_unknown(self):
        with self.assertRaises(UnknownIdentifierError) as cm:
            parse_generator("c*d_th")
        self.assertEqual(cm.exception.name, "c")

    def test_reserved_unknown(self):
        with self.assertRaises(GeneratorSyntaxError):
            parse_ansatz("d_th", ["th"])


class TestCatalogue(SimpleTestCase):
    def test_names(self):
        self.assertEqual(tuple(corrected_catalogue()), CATALOGUE_NAMES)
        self.assertEqual(set(corrupted_catalogue()), {"G4+", "G4-", "G6+", "G6-", "G8+", "G8-"})

    def test_corrected_generators_are_symmetries(self):
        for name, generator in corrected_catalogue().items():
            with self.subTest(name=name):
                self.assertTrue(symmetry_residual(generator).is_zero())

    def test_printed_coefficients_are_not(self):
        for name, generator in printed_catalogue().items():
            with self.subTest(name=name):
                residual = symmetry_residual(generator)
                if name[:2] in ("G6", "G8"):
                    self.assertFalse(residual.is_zero())
                else:
                    self.assertTrue(residual.is_zero())

    def test_corrupted_generators_are_not(self):
        for name, generator in corrupted_catalogue().items():
            with self.subTest(name=name):
                self.assertFalse(symmetry_residual(generator).is_zero())

    def test_default_ansatze_solve_exactly(self):
        expected = {"G6+": "sqrt2*i", "G6-": "-sqrt2*i", "G8+": "sqrt2*i", "G8-": "-sqrt2*i"}
        for name, text in DEFAULT_ANSATZE.items():
            with self.subTest(name=name):
                space = solve_coefficients(parse_ansatz(text, ["c"]))
                self.assertTrue(space.unique)
                self.assertEqual(str(space.particular["c"]), expected[name])
                self.assertEqual(
                    parse_ansatz(text, ["c"]).substitute(space.particular),
                    corrected_catalogue()[name],
                )

    def test_resolve(self):
        self.assertEqual(resolve("G3"), gamma3())
        self.assertEqual(resolve("mine", {"mine": "d_th"}), gamma2())
        self.assertEqual(resolve("u1*d_u1"), gamma3())
        with self.assertRaises(UnknownIdentifierError):
            resolve("G10")
