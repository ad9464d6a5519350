"""
The angular-momentum law L^2 = L0^2 + alpha(theta), the u = 1/r reduction
and its residual diagnostics, and the audit of imposed L^2(theta) profiles.

With u = 1/r and a non-constant L the radial equation becomes

    u_theta_theta + alpha'(theta) / (2 L^2) u_theta + (1 + F(theta) / L^2) u = 0

where F is the radial forcing profile (r^3 times the radial acceleration).
This is the ``derived_full`` form; the printed forms are kept alongside it
as comparison targets.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import shapefn
from .constants import (
    DEFAULT_THETA_REF,
    AuditCondition,
    PrimeReading,
    ReducedForm,
    SystemClass,
)
from .exceptions import (
    InvalidReductionError,
    PreconditionError,
    QuadraturePoleError,
    SingularConfigurationError,
)
from .integrate import (
    ReducedTrajectory,
    Trajectory,
    quadrature,
    resample_by_theta,
)
from .shapefn import ShapeExpr
from .systems import SystemSpec, paper_polar_forcing
from .utils import cosec, cot, max_abs, quadrant_center, rms, sec

logger = logging.getLogger(__name__)


def check_regular_angle(theta: float) -> None:
    if math.sin(theta) == 0.0 or math.cos(theta) == 0.0:
        raise SingularConfigurationError(f"trigonometric pole at theta={theta!r}")


def angular_integrand(spec: SystemSpec, theta: float) -> float:
    """
    dL^2/dtheta as a function of theta alone, i.e. 2 r^3 times the
    transversal acceleration.
    """
    check_regular_angle(theta)
    tan, ct = math.tan(theta), cot(theta)
    sec_sq, cosec_sq = sec(theta) ** 2, cosec(theta) ** 2
    if spec.system_class == SystemClass.TOY:
        # -(tan^2 + cot^2)'
        return 2.0 * (ct * cosec_sq - tan * sec_sq)
    f, g = spec.shape_values(tan)
    if spec.system_class == SystemClass.GENERALIZED:
        return 2.0 * (cosec_sq * g - sec_sq * f)
    return 2.0 * (ct * cosec_sq * g - tan * sec_sq * f)


def printed_law_integrand(spec: SystemSpec, theta: float) -> float:
    check_regular_angle(theta)
    sec_sq, cosec_sq = sec(theta) ** 2, cosec(theta) ** 2
    if spec.system_class == SystemClass.TOY:
        return sec_sq - cosec_sq
    f, g = spec.shape_values(math.tan(theta))
    return 2.0 * (cosec_sq * cot(theta) * g - sec_sq * math.tan(theta) * f)


def angular_integrand_variants(spec: SystemSpec, theta: float) -> dict:
    """
    Every available reading of dL^2/dtheta at ``theta``: the one obtained by
    rotating the Cartesian forces (``derived``), the printed angular law
    (``printed_law``) and twice r^3 times each printed transversal equation.
    """
    variants = {
        "derived": angular_integrand(spec, theta),
        "printed_law": printed_law_integrand(spec, theta),
    }
    readings = [PrimeReading.AS_PRINTED]
    if spec.system_class == SystemClass.TOY:
        readings.append(PrimeReading.SQUARED)
    for reading in readings:
        _, transversal = paper_polar_forcing(spec, 1.0, theta, reading)
        variants[f"printed_transversal_{reading}"] = 2.0 * transversal
    return variants


def radial_profile(spec: SystemSpec, theta: float) -> float:
    """
    F(theta) = r^3 times the radial acceleration, for w = 0 and C = 0.
    """
    check_regular_angle(theta)
    sin, cos = math.sin(theta), math.cos(theta)
    if spec.system_class == SystemClass.TOY:
        return (math.tan(theta) + cot(theta)) ** 2
    f, g = spec.shape_values(math.tan(theta))
    if spec.system_class == SystemClass.GENERALIZED:
        return (f + g) / (sin * cos)
    return sec(theta) ** 2 * f + cosec(theta) ** 2 * g + sec(theta) * spec.h_value(
        cot(theta)
    )


def same_quadrant(a: float, b: float) -> bool:
    quarter = math.pi / 2
    return math.floor(a / quarter) == math.floor(b / quarter)


@dataclass(frozen=True)
class AngularLaw:
    """
    L^2(theta) = L0_sq + alpha(theta), with alpha the antiderivative of
    ``angular_integrand()`` normalised by alpha(theta_ref) = 0. ``L0_sq`` is
    only known once measured on a trajectory.
    """

    spec: SystemSpec
    theta_ref: float = DEFAULT_THETA_REF
    L0_sq: Optional[float] = None

    @classmethod
    def from_trajectory(
        cls, traj: Trajectory, theta_ref: Optional[float] = None
    ) -> "AngularLaw":
        theta0 = float(traj.theta()[0])
        if theta_ref is None:
            theta_ref = quadrant_center(theta0)
        law = cls(traj.spec, theta_ref)
        L0 = float(traj.angular_momentum()[0])
        return cls(traj.spec, theta_ref, L0 * L0 - law.alpha(theta0))

    def integrand(self, theta: float) -> float:
        return angular_integrand(self.spec, theta)

    def alpha(self, theta: float) -> float:
        return alpha(self, theta)

    def L_sq(self, theta: float) -> float:
        if self.L0_sq is None:
            raise ValueError("L0_sq has not been measured for this angular law")
        return self.L0_sq + self.alpha(theta)

    def closed_form_alpha(self, theta: float) -> Optional[float]:
        """
        alpha in closed form where one is known (the toy, and the
        generalized class with f = g = 1); ``None`` otherwise.
        """

        def antiderivative(x):
            if self.spec.system_class == SystemClass.TOY:
                return -(math.tan(x) ** 2) - cot(x) ** 2
            return -2.0 * (math.tan(x) + cot(x))

        if self.spec.system_class == SystemClass.GENERALIZED:
            if not all(
                e.is_constant() and e.evaluate(0.0) == 1.0
                for e in (self.spec.f, self.spec.g)
            ):
                return None
        elif self.spec.system_class != SystemClass.TOY:
            return None
        return antiderivative(theta) - antiderivative(self.theta_ref)


def alpha(law: AngularLaw, theta: float) -> float:
    if theta == law.theta_ref:
        return 0.0
    if not same_quadrant(theta, law.theta_ref) or math.cos(theta) == 0.0:
        raise QuadraturePoleError(
            f"a trigonometric pole lies between theta_ref={law.theta_ref!r} "
            f"and theta={theta!r}",
            point=theta,
        )
    return quadrature(law.integrand, law.theta_ref, theta)


class LawReport(NamedTuple):
    max: float
    rms: float
    residuals: np.ndarray


def check_angular_law(law: AngularLaw, rt: ReducedTrajectory) -> LawReport:
    """
    |L^2(theta) - L0_sq - alpha(theta)| over the nodes of ``rt``.
    """
    residuals = np.array(
        [L_sq - law.L0_sq - law.alpha(theta) for theta, L_sq in zip(rt.theta, rt.L_sq)]
    )
    report = LawReport(max_abs(residuals), rms(residuals), residuals)
    logger.debug("angular law residual: max %r, rms %r", report.max, report.rms)
    return report


def check_reduction_precondition(spec: SystemSpec) -> None:
    if not spec.has_zero_frequency():
        raise PreconditionError(
            f"reduction requires w = 0, got w(t) = {spec.w.source!r}"
        )
    if spec.system_class == SystemClass.KEPLER_ERMAKOV and spec.C != 0.0:
        raise PreconditionError(f"reduction requires C = 0, got C = {spec.C!r}")


class ReducedCoefficients(NamedTuple):
    damping: float
    stiffness: float


def reduced_coeffs(
    spec: SystemSpec,
    law: AngularLaw,
    form: ReducedForm,
    theta: float,
    L_sq: Optional[float] = None,
) -> ReducedCoefficients:
    """
    Returns (damping, stiffness) of u_theta_theta + damping u_theta +
    stiffness u = 0 in the requested form. ``L_sq`` overrides the angular
    law, for evaluating a form under an imposed L^2 profile.
    """
    check_reduction_precondition(spec)
    form = ReducedForm(form)
    if form in (ReducedForm.PAPER_2_6_OR_2_9, ReducedForm.PAPER_2_13):
        return ReducedCoefficients(0.0, 2.0)

    if L_sq is None:
        L_sq = law.L_sq(theta)
    if not L_sq > 0.0:
        raise InvalidReductionError(
            f"L^2 = {L_sq!r} at theta={theta!r}; the reduction is invalid", theta=theta
        )

    if form == ReducedForm.PAPER_2_4:
        check_regular_angle(theta)
        f, g = spec.shape_values(math.tan(theta))
        stiffness = (
            1.0
            + cosec(theta) * spec.h_value(cot(theta))
            + (sec(theta) ** 2 * f + cosec(theta) ** 2 * g) / L_sq
        )
        return ReducedCoefficients(0.0, stiffness)

    return ReducedCoefficients(
        angular_integrand(spec, theta) / (2.0 * L_sq),
        1.0 + radial_profile(spec, theta) / L_sq,
    )


@dataclass(frozen=True, eq=False)
class ResidualReport:
    form: ReducedForm
    theta: np.ndarray
    residual: np.ndarray
    max: float
    rms: float
    # |du2/dtheta| for the conserved label u2 = L0_sq
    u2_theta_max: float = 0.0

    def as_dict(self) -> dict:
        return {
            "form": self.form,
            "max": self.max,
            "rms": self.rms,
            "samples": len(self.theta),
            "u2_theta_max": self.u2_theta_max,
        }


def reduced_residual(
    rt: ReducedTrajectory, form: ReducedForm, law: Optional[AngularLaw] = None
) -> ResidualReport:
    """
    e(theta) = u_theta_theta + damping u_theta + stiffness u at every node
    of ``rt``. The ``derived_full`` residual vanishes to integration
    accuracy; the printed forms generally do not.
    """
    if law is None:
        law = AngularLaw.from_trajectory(rt.trajectory)
    form = ReducedForm(form)
    spec = rt.trajectory.spec
    residual = np.empty_like(rt.theta)
    for i, theta in enumerate(rt.theta):
        # the measured L^2 at the node; the law is checked separately
        coeffs = reduced_coeffs(spec, law, form, theta, L_sq=rt.L_sq[i])
        residual[i] = (
            rt.u_theta_theta[i] + coeffs.damping * rt.u_theta[i] + coeffs.stiffness * rt.u[i]
        )
    # u2 = L^2 - alpha(theta) as measured; constant along an exact orbit
    label = rt.L_sq - np.array([law.alpha(theta) for theta in rt.theta])
    report = ResidualReport(
        form=form,
        theta=rt.theta,
        residual=residual,
        max=max_abs(residual),
        rms=rms(residual),
        u2_theta_max=max_abs(np.gradient(label, rt.theta)),
    )
    if form != ReducedForm.DERIVED_FULL and report.max > 0.0:
        logger.info("%s residual on %s: max %r", form, spec.system_class, report.max)
    return report


class AuditRow(NamedTuple):
    condition: str
    theta: float
    imposed_derivative: float
    integrand: float
    defect: float


def imposed_profile_derivative(condition: AuditCondition, theta: float) -> float:
    """
    d/dtheta of the imposed L^2 profile. Both built-in conditions impose
    L^2 = (tan + cot)^2: the toy directly, and L^-1 = sin cos for the
    other classes.
    """
    check_regular_angle(theta)
    tan, ct = math.tan(theta), cot(theta)
    return 2.0 * (tan + ct) * (sec(theta) ** 2 - cosec(theta) ** 2)


def condition_audit(
    spec: SystemSpec,
    condition: Union[AuditCondition, str, ShapeExpr],
    thetas: Sequence[float],
) -> List[AuditRow]:
    """
    Samples defect(theta) = d(L^2_imposed)/dtheta - angular_integrand(theta).
    The defect vanishes identically exactly when the imposed profile is a
    solution of the angular law. ``condition`` is a built-in condition or
    an L^2 profile in the shape-function language (variable ``th``).
    """
    profile = None
    if isinstance(condition, ShapeExpr):
        profile = condition
    else:
        try:
            condition = AuditCondition(condition)
        except ValueError:
            profile = shapefn.parse(condition)
    if profile is not None:
        derivative = shapefn.deriv(profile)
        label = profile.source
    else:
        label = str(condition)

    rows = []
    for theta in thetas:
        theta = float(theta)
        if profile is not None:
            imposed = shapefn.evaluate(derivative, theta)
        else:
            imposed = imposed_profile_derivative(condition, theta)
        integrand = angular_integrand(spec, theta)
        rows.append(AuditRow(label, theta, imposed, integrand, imposed - integrand))
    logger.debug(
        "audited %s on %d samples: max |defect| %r",
        label,
        len(rows),
        max_abs(row.defect for row in rows),
    )
    return rows


def reduce_trajectory(traj: Trajectory, samples: int) -> ReducedTrajectory:
    traj.raise_for_singularity()
    return resample_by_theta(traj, samples)
