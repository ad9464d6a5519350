"""
Numeric symmetry machinery on (th, u1, u2): flows of real generators, the
check that a flow maps oscillator solutions to oscillator solutions, the
generator induced on the original variables (t, r) along a trajectory, and
time translation of the Cartesian systems.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from .constants import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    FIT_DEGREE,
    FIT_WINDOW,
    FLOW_TOL,
    INTEGRATOR_METHOD,
    QUADRATURE_LIMIT,
    Part,
    SystemClass,
)
from .exceptions import FlowEscapeError
from .generators import corrupted_catalogue
from .integrate import (
    ReducedTrajectory,
    angle_near,
    check_solution,
    check_theta_monotone,
    integrate_cart,
    quadrature,
)
from .reduce import AngularLaw, printed_law_integrand
from .symexpr import U1, U2, GeneratorSym, SymExpr
from .systems import CartState, SystemSpec
from .utils import max_abs, rms

logger = logging.getLogger(__name__)

ROOT2 = math.sqrt(2.0)


def compile_expr(e: SymExpr) -> Callable[[float, float, float], complex]:
    terms = [
        (complex(c), complex(lam), exponents[U1], exponents[U2])
        for (lam, exponents), c in e.terms.items()
    ]

    def evaluate(theta, u1, u2):
        total = 0j
        for c, lam, a, b in terms:
            total += c * cmath.exp(lam * theta) * u1 ** a * u2 ** b
        return total

    return evaluate


@dataclass(frozen=True)
class GeneratorNum:
    """
    A real generator xi d_th + eta1 d_u1 + eta2 d_u2 with numeric
    coefficients. ``label`` and ``part`` record where it came from.
    """

    label: str
    part: Part
    xi: Callable[[float, float, float], float] = field(repr=False)
    eta1: Callable[[float, float, float], float] = field(repr=False)
    eta2: Callable[[float, float, float], float] = field(repr=False)
    is_zero: bool = False

    @classmethod
    def from_symbolic(
        cls, gen: GeneratorSym, part: Part = Part.REAL, label: str = ""
    ) -> "GeneratorNum":
        part = Part(part)

        def real_form(e):
            compiled = compile_expr(e)
            if part == Part.REAL:
                return lambda theta, u1, u2: compiled(theta, u1, u2).real
            return lambda theta, u1, u2: compiled(theta, u1, u2).imag

        return cls(
            label=label or str(gen),
            part=part,
            xi=real_form(gen.xi),
            eta1=real_form(gen.eta1),
            eta2=real_form(gen.eta2),
            is_zero=gen.is_zero(),
        )

    @property
    def name(self) -> str:
        return f"{self.label}:{self.part}"

    def vector(self, theta: float, u1: float, u2: float) -> np.ndarray:
        return np.array(
            [self.xi(theta, u1, u2), self.eta1(theta, u1, u2), self.eta2(theta, u1, u2)]
        )


def corrupt(label: str) -> GeneratorSym:
    """
    The negative control for catalogue generator ``label``: its internal
    coefficient scaled by 11/10. Only G4, G6 and G8 have one.
    """
    controls = corrupted_catalogue()
    if label not in controls:
        raise ValueError(
            f"{label!r} has no corrupted control; choose one of {', '.join(controls)}"
        )
    return controls[label]


def flow_map(
    g: GeneratorNum, point: Sequence[float], epsilon: float, tol: float = FLOW_TOL
) -> np.ndarray:
    """
    Follows d(th, u1, u2)/d(epsilon) = (xi, eta1, eta2) from ``point`` for
    ``epsilon`` (which may be negative).
    """
    start = np.asarray(point, dtype=float)
    if epsilon == 0.0:
        return start.copy()

    def rhs(_, y):
        try:
            return g.vector(*y)
        except (OverflowError, ZeroDivisionError) as e:
            raise FlowEscapeError(f"flow of {g.name} left the domain: {e}")

    solution = solve_ivp(
        rhs, (0.0, epsilon), start, method=INTEGRATOR_METHOD, rtol=tol, atol=tol
    )
    if solution.status != 0 or not np.all(np.isfinite(solution.y)):
        raise FlowEscapeError(
            f"flow of {g.name} from {tuple(start)} failed at epsilon={epsilon!r}: "
            f"{solution.message}"
        )
    return solution.y[:, -1]


@dataclass(frozen=True)
class ReferenceSolution:
    """u1 = A cos(sqrt2 th) + B sin(sqrt2 th), u2 constant, on [0, theta_max]."""

    A: float = 1.0
    B: float = 0.5
    u2: float = 1.0
    theta_max: float = 2.0
    samples: int = 201

    def sample(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.samples < FIT_WINDOW:
            raise ValueError(f"at least {FIT_WINDOW} reference samples are required")
        theta = np.linspace(0.0, self.theta_max, self.samples)
        u1 = self.A * np.cos(ROOT2 * theta) + self.B * np.sin(ROOT2 * theta)
        return theta, u1, np.full_like(theta, self.u2)


def oscillator_defect(theta: np.ndarray, u1: np.ndarray) -> np.ndarray:
    """
    |p'' + 2 p| at every sample, p being a local quintic fit. The fits are
    taken of the departure of ``u1`` from its least-squares projection onto
    span(cos(sqrt2 th), sin(sqrt2 th)); the operator annihilates the
    projection, so only the departure carries truncation error.
    """
    basis = np.column_stack([np.cos(ROOT2 * theta), np.sin(ROOT2 * theta)])
    coefficients, *_ = np.linalg.lstsq(basis, u1, rcond=None)
    departure = u1 - basis @ coefficients

    n = len(theta)
    half = FIT_WINDOW // 2
    spacing = float(np.median(np.abs(np.diff(theta))))
    defects = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - FIT_WINDOW)
        window = slice(lo, lo + FIT_WINDOW)
        x = (theta[window] - theta[i]) / spacing
        p = np.polyfit(x, departure[window], FIT_DEGREE)
        defects[i] = abs(2.0 * p[-3] / spacing ** 2 + 2.0 * p[-1])
    return defects


@dataclass(frozen=True, eq=False)
class FlowVerification:
    generator: str
    epsilon: float
    tol: float
    monotone: bool
    max_defect: Optional[float]
    u2_spread: Optional[float]
    defects: np.ndarray = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return (
            self.monotone
            and self.max_defect is not None
            and max(self.max_defect, self.u2_spread) < self.tol
        )

    def as_dict(self) -> dict:
        return {
            "generator": self.generator,
            "epsilon": self.epsilon,
            "tol": self.tol,
            "monotone": self.monotone,
            "max_defect": self.max_defect,
            "u2_spread": self.u2_spread,
            "passed": self.passed,
        }


def verify_solution_mapping(
    g: GeneratorNum,
    epsilon: float,
    tol: float,
    reference: ReferenceSolution = ReferenceSolution(),
) -> FlowVerification:
    """
    Maps every sample of the reference solution through the flow of ``g``
    and measures how far the image curve, parametrised by its own th, is
    from solving u1'' + 2 u1 = 0 with u2 constant. An image whose th is not
    monotone is reported as failing.
    """
    image = np.array(
        [flow_map(g, point, epsilon) for point in zip(*reference.sample())]
    )
    theta, u1, u2 = image.T
    steps = np.diff(theta)
    monotone = bool(np.all(steps > 0.0) or np.all(steps < 0.0))
    if not monotone:
        logger.info("image of %s at epsilon=%r is not th-monotone", g.name, epsilon)
        return FlowVerification(g.name, epsilon, tol, False, None, None)
    if steps[0] < 0.0:
        theta, u1, u2 = theta[::-1], u1[::-1], u2[::-1]

    defects = oscillator_defect(theta, u1)
    result = FlowVerification(
        generator=g.name,
        epsilon=epsilon,
        tol=tol,
        monotone=True,
        max_defect=float(defects.max()),
        u2_spread=float(u2.max() - u2.min()),
        defects=defects,
    )
    logger.debug(
        "%s at epsilon=%r: max defect %r, u2 spread %r",
        g.name,
        epsilon,
        result.max_defect,
        result.u2_spread,
    )
    return result


# Induced generators on the original variables


def paper_v1_integrand(spec: SystemSpec, theta: float) -> float:
    if spec.system_class == SystemClass.TOY:
        # sec^2 - cosec^2
        return printed_law_integrand(spec, theta)
    # 2 (sec^2 tan f - cosec^2 cot g)
    return -printed_law_integrand(spec, theta)


def paper_columns(
    g: GeneratorNum, spec: SystemSpec, law: AngularLaw, theta: float, r: float, L: float
) -> Tuple[float, float]:
    """
    (dt, dr) of the printed generalized symmetry matching ``g``'s catalogue
    label, in the same real or imaginary part as ``g``. NaN when the label
    has no printed counterpart.
    """
    if g.is_zero:
        return 0.0, 0.0
    label = g.label
    part = (lambda z: z.real) if g.part == Part.REAL else (lambda z: z.imag)

    if label == "G1":
        integral = quadrature(lambda x: paper_v1_integrand(spec, x), law.theta_ref, theta)
        return part(complex(L * L + integral)), part(complex(-2.0 / r ** 3))
    if label == "G2":
        return part(complex(L / r ** 2)), 0.0
    if label == "G3":
        return 0.0, part(complex(-1.0 / r ** 3))
    if label[:2] in ("G4", "G6", "G8") and label[2:] in ("+", "-"):
        sign = 1.0 if label[2] == "+" else -1.0
        if label.startswith("G4"):
            phase = cmath.exp(sign * ROOT2 * 1j * theta)
            return 0.0, part(-phase / r ** 2)
        if label.startswith("G6"):
            phase = cmath.exp(sign * 2.0 * ROOT2 * 1j * theta)
            return part(phase * L / r ** 2), part(phase * -sign * 1j / r ** 3)
        phase = cmath.exp(sign * ROOT2 * 1j * theta)
        return part(phase * L / r ** 2), part(phase * -sign * 1j / r ** 4)
    return math.nan, math.nan


PULLBACK_HEADER = (
    "theta",
    "t",
    "r",
    "dt_derived",
    "dr_derived",
    "dt_paper",
    "dr_paper",
    "mismatch_dt",
    "mismatch_dr",
)


@dataclass(frozen=True, eq=False)
class PullbackReport:
    """
    Per-node induced infinitesimals (dt, dr) of a generator along a
    trajectory, divided by epsilon, next to the printed formulas.
    ``dt_derived = dt_local + dt_nonlocal``; the printed time component
    keeps only the local part (r^2 / L) xi, so the summary reports the
    size of each part separately.
    """

    generator: str
    theta: np.ndarray
    t: np.ndarray
    r: np.ndarray
    dt_local: np.ndarray
    dt_nonlocal: np.ndarray
    dr_derived: np.ndarray
    dt_paper: np.ndarray
    dr_paper: np.ndarray
    nonlocal_crosscheck: float

    @property
    def dt_derived(self) -> np.ndarray:
        return self.dt_local + self.dt_nonlocal

    @property
    def mismatch_dt(self) -> np.ndarray:
        return self.dt_derived - self.dt_paper

    @property
    def mismatch_dr(self) -> np.ndarray:
        return self.dr_derived - self.dr_paper

    def rows(self):
        columns = (
            self.theta,
            self.t,
            self.r,
            self.dt_derived,
            self.dr_derived,
            self.dt_paper,
            self.dr_paper,
            self.mismatch_dt,
            self.mismatch_dr,
        )
        return [tuple(float(c[i]) for c in columns) for i in range(len(self.theta))]

    def summary(self) -> dict:
        return {
            "generator": self.generator,
            "nodes": len(self.theta),
            "max_mismatch_dt": max_abs(self.mismatch_dt),
            "max_mismatch_dr": max_abs(self.mismatch_dr),
            "rms_mismatch_dt": rms(self.mismatch_dt),
            "rms_mismatch_dr": rms(self.mismatch_dr),
            "max_abs_dt_local": max_abs(self.dt_local),
            "max_abs_dt_nonlocal": max_abs(self.dt_nonlocal),
            "nonlocal_crosscheck": self.nonlocal_crosscheck,
        }


def induced_original_variables(
    g: GeneratorNum, rt: ReducedTrajectory, law: Optional[AngularLaw] = None
) -> PullbackReport:
    """
    Pulls ``g`` back to (t, r) along the trajectory behind ``rt``, with
    u2 = L0_sq. From u1 = 1/r, dr = -r^2 eta1. Time follows dt = G dth with
    G = r^2 / L and L^2 = u2 + alpha(th), so

        dt = G xi + N,    N' = G_u1 (eta1 - u1' xi) + G_u2 eta2,    N(th_start) = 0

    N is integrated in t against the trajectory's dense output and checked
    by quadrature between consecutive nodes.
    """
    traj = rt.trajectory
    check_theta_monotone(traj)
    if law is None:
        law = AngularLaw.from_trajectory(traj)
    u2 = law.L0_sq

    def reduced_state(t):
        x, y, vx, vy = traj.solution(t)
        r = math.hypot(x, y)
        L = x * vy - y * vx
        vr = (x * vx + y * vy) / r
        return r, L, vr

    node_theta = traj.theta()

    def n_rate(t):
        # dN/dt = N'(th) * th', th' = L u1^2
        x, y = traj.solution(t)[:2]
        theta = angle_near(x, y, np.interp(t, traj.t, node_theta))
        r, L, vr = reduced_state(t)
        u1 = 1.0 / r
        u1_theta = -vr / L
        xi, eta1, eta2 = g.vector(theta, u1, u2)
        G_u1 = -2.0 / (u1 ** 3 * L)
        G_u2 = -1.0 / (2.0 * u1 ** 2 * L ** 3)
        return (G_u1 * (eta1 - u1_theta * xi) + G_u2 * eta2) * L * u1 * u1

    def rhs(t, y):
        return [n_rate(t)]

    solution = solve_ivp(
        rhs,
        (rt.t[0], rt.t[-1]),
        [0.0],
        method=INTEGRATOR_METHOD,
        t_eval=rt.t,
        rtol=DEFAULT_RTOL,
        atol=DEFAULT_ATOL,
    )
    check_solution(solution)
    dt_nonlocal = solution.y[0]

    crosscheck = np.zeros_like(rt.t)
    for i in range(1, len(rt.t)):
        piece, _ = quad(
            n_rate,
            rt.t[i - 1],
            rt.t[i],
            epsabs=1e-12,
            epsrel=1e-12,
            limit=QUADRATURE_LIMIT,
        )
        crosscheck[i] = crosscheck[i - 1] + piece

    dt_local = np.empty_like(rt.theta)
    dr = np.empty_like(rt.theta)
    dt_paper = np.empty_like(rt.theta)
    dr_paper = np.empty_like(rt.theta)
    for i, theta in enumerate(rt.theta):
        u1, r, L = rt.u[i], rt.r[i], rt.L[i]
        xi, eta1, _ = g.vector(theta, u1, u2)
        dt_local[i] = r * r / L * xi
        dr[i] = -r * r * eta1
        dt_paper[i], dr_paper[i] = paper_columns(g, traj.spec, law, theta, r, L)

    report = PullbackReport(
        generator=g.name,
        theta=rt.theta,
        t=rt.t,
        r=rt.r,
        dt_local=dt_local,
        dt_nonlocal=dt_nonlocal,
        dr_derived=dr,
        dt_paper=dt_paper,
        dr_paper=dr_paper,
        nonlocal_crosscheck=max_abs(dt_nonlocal - crosscheck),
    )
    logger.debug("pullback of %s: %s", g.name, report.summary())
    return report


@dataclass(frozen=True)
class TimeTranslationReport:
    w_constant: bool
    shift: float
    max_deviation: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.max_deviation < self.tol

    def as_dict(self) -> dict:
        return {
            "w_constant": self.w_constant,
            "shift": self.shift,
            "max_deviation": self.max_deviation,
            "tol": self.tol,
            "holds": self.holds,
        }


def time_translation_check(
    spec: SystemSpec,
    ic: CartState,
    t_end: float,
    shift: float = 0.5,
    samples: int = 50,
    tol: float = 1e-7,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> TimeTranslationReport:
    """
    d_t is a symmetry of the Cartesian system when a trajectory started at
    ``ic.t + shift`` is the original one delayed by ``shift``. That holds
    exactly when w is constant.
    """
    original = integrate_cart(spec, ic, t_end, rtol, atol)
    delayed_ic = CartState(ic.t + shift, ic.x, ic.y, ic.vx, ic.vy)
    delayed = integrate_cart(spec, delayed_ic, t_end + shift, rtol, atol)
    for traj in (original, delayed):
        traj.raise_for_singularity()

    elapsed = np.linspace(0.0, t_end - ic.t, samples)
    deviation = max(
        float(
            np.max(
                np.abs(
                    original.state_at(ic.t + dt).as_array()
                    - delayed.state_at(delayed_ic.t + dt).as_array()
                )
            )
        )
        for dt in elapsed
    )
    report = TimeTranslationReport(spec.w.is_constant(), shift, deviation, tol)
    if report.holds != report.w_constant:
        logger.info(
            "time translation %s although w is %sconstant",
            "holds" if report.holds else "fails",
            "" if report.w_constant else "not ",
        )
    return report
