import math

from django.db.models import TextChoices


class SystemClass(TextChoices):
    KEPLER_ERMAKOV = "kepler_ermakov", "Kepler-Ermakov"
    GENERALIZED = "generalized", "generalized Ermakov"
    TOY = "toy", "Ermakov toy"


class ReducedForm(TextChoices):
    DERIVED_FULL = "derived_full", "derived full reduction"
    PAPER_2_4 = "paper_2_4", "printed oscillator form"
    PAPER_2_6_OR_2_9 = "paper_2_6_or_2_9", "printed Kepler-Ermakov/generalized form"
    PAPER_2_13 = "paper_2_13", "printed toy form"


class AuditCondition(TextChoices):
    EQ_2_5 = "eq_2_5", "f = g = sin(th)cos(th) = 1/L"
    TOY_L = "toy_L", "L = tan(th) + cot(th)"


class PrimeReading(TextChoices):
    AS_PRINTED = "as_printed", "(tan - cot)'"
    SQUARED = "squared", "((tan - cot)^2)'"


class Part(TextChoices):
    REAL = "re", "real part"
    IMAG = "im", "imaginary part"


class Command(TextChoices):
    SIMULATE = "simulate"
    REDUCE = "reduce"
    AUDIT = "audit"
    SYMMETRY_CHECK = "symmetry-check"
    SYMMETRY_SOLVE = "symmetry-solve"
    FLOW_VERIFY = "flow-verify"
    PULLBACK = "pullback"
    REPORT = "report"


# Integration
SINGULARITY_GUARD = 1e-8
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
INTEGRATOR_METHOD = "RK45"
RK45_STAGE_EVALUATIONS = 6

# Quadrature and root finding
QUADRATURE_TOL = 1e-10
QUADRATURE_LIMIT = 200
THETA_ROOT_TOL = 1e-12
MIN_THETA_SAMPLES = 8

# Reduction
DEFAULT_THETA_REF = math.pi / 4
PHI_REFERENCE_POINT = 1.0

# Symmetry flows
FLOW_TOL = 1e-12
FIT_WINDOW = 9
FIT_DEGREE = 5

# Output
FLOAT_FORMAT = ".17g"
