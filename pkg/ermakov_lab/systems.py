"""
The three Ermakov classes: Cartesian dynamics, polar conversion, the polar
equations obtained by rotating the Cartesian accelerations, the polar
equations as printed in the literature, and the Ermakov-Lewis invariant.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import shapefn
from .constants import PHI_REFERENCE_POINT, PrimeReading, SystemClass
from .exceptions import (
    QuadraturePoleError,
    SingularConfigurationError,
    SpecValidationError,
)
from .shapefn import ShapeExpr
from .utils import cosec, cot, sec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemSpec:
    """
    One of the three Ermakov classes. ``f`` and ``g`` take s = y/x, ``h``
    takes s = cot(theta) and ``w`` takes t. Fields that the class does not use
    must be left as ``None``.
    """

    system_class: SystemClass
    w: ShapeExpr
    f: Optional[ShapeExpr] = None
    g: Optional[ShapeExpr] = None
    h: Optional[ShapeExpr] = None
    C: Optional[float] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "system_class", SystemClass(self.system_class))
        except ValueError:
            raise SpecValidationError(
                f"unknown system class {self.system_class!r}; "
                f"expected one of {', '.join(SystemClass.values)}"
            )
        if self.w is None:
            raise SpecValidationError("a frequency function w(t) is required")

        extraneous = []
        if self.system_class == SystemClass.TOY:
            extraneous = [n for n in ("f", "g", "h", "C") if getattr(self, n) is not None]
        elif self.system_class == SystemClass.GENERALIZED:
            extraneous = [n for n in ("h", "C") if getattr(self, n) is not None]
        if extraneous:
            raise SpecValidationError(
                f"{self.system_class.label} systems do not use: {', '.join(extraneous)}"
            )

        if self.system_class != SystemClass.TOY:
            missing = [n for n in ("f", "g") if getattr(self, n) is None]
            if missing:
                raise SpecValidationError(
                    f"{self.system_class.label} systems require: {', '.join(missing)}"
                )
        if self.system_class == SystemClass.KEPLER_ERMAKOV:
            if self.h is None:
                object.__setattr__(self, "h", shapefn.parse("0"))
            if self.C is None:
                object.__setattr__(self, "C", 0.0)
            object.__setattr__(self, "C", float(self.C))

    @classmethod
    def from_strings(
        cls,
        system_class: str,
        w: str = "0",
        f: Optional[str] = None,
        g: Optional[str] = None,
        h: Optional[str] = None,
        C: Optional[float] = None,
    ) -> "SystemSpec":
        def parsed(text):
            return None if text is None else shapefn.parse(text)

        return cls(
            system_class=system_class,
            w=parsed(w),
            f=parsed(f),
            g=parsed(g),
            h=parsed(h),
            C=C,
        )

    def w_squared(self, t: float) -> float:
        return self.w.evaluate(t) ** 2

    def has_zero_frequency(self) -> bool:
        return self.w.is_zero()

    def shape_values(self, s: float) -> Tuple[float, float]:
        """
        Returns (f(s), g(s)); the toy behaves as f = g = 1.
        """
        if self.system_class == SystemClass.TOY:
            return 1.0, 1.0
        return self.f.evaluate(s), self.g.evaluate(s)

    def h_value(self, s: float) -> float:
        if self.system_class != SystemClass.KEPLER_ERMAKOV:
            return 0.0
        return self.h.evaluate(s)


@dataclass(frozen=True)
class CartState:
    t: float
    x: float
    y: float
    vx: float
    vy: float

    @classmethod
    def from_array(cls, t: float, values) -> "CartState":
        x, y, vx, vy = (float(v) for v in values)
        return cls(float(t), x, y, vx, vy)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy])

    @property
    def angular_momentum(self) -> float:
        return self.x * self.vy - self.y * self.vx


@dataclass(frozen=True)
class PolarState:
    t: float
    r: float
    theta: float
    vr: float
    omega: float

    @classmethod
    def from_array(cls, t: float, values) -> "PolarState":
        r, theta, vr, omega = (float(v) for v in values)
        return cls(float(t), r, theta, vr, omega)

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.theta, self.vr, self.omega])

    @property
    def angular_momentum(self) -> float:
        return self.r * self.r * self.omega


class PolarAcceleration(NamedTuple):
    rdd: float
    thdd: float


class PaperPolarAcceleration(NamedTuple):
    rdd: float
    thdd: float
    rdd_residual: float
    thdd_residual: float

    @property
    def consistent(self) -> bool:
        return self.rdd_residual == 0.0 and self.thdd_residual == 0.0


def to_polar(state: CartState) -> PolarState:
    x, y, vx, vy = state.x, state.y, state.vx, state.vy
    r_sq = x * x + y * y
    if r_sq == 0.0:
        raise SingularConfigurationError("the origin has no polar representation")
    r = math.sqrt(r_sq)
    return PolarState(
        t=state.t,
        r=r,
        theta=math.atan2(y, x),
        vr=(x * vx + y * vy) / r,
        omega=(x * vy - y * vx) / r_sq,
    )


def from_polar(p: PolarState) -> CartState:
    cos, sin = math.cos(p.theta), math.sin(p.theta)
    return CartState(
        t=p.t,
        x=p.r * cos,
        y=p.r * sin,
        vx=p.vr * cos - p.r * p.omega * sin,
        vy=p.vr * sin + p.r * p.omega * cos,
    )


def cart_forcing(spec: SystemSpec, t: float, x: float, y: float) -> Tuple[float, float]:
    """
    Returns the right-hand sides of the Ermakov pair without the common
    -w(t)^2 restoring term.
    """
    if x == 0.0 or y == 0.0:
        raise SingularConfigurationError(
            f"singular configuration x={x!r}, y={y!r}", t=t
        )
    if spec.system_class == SystemClass.TOY:
        return 1.0 / x ** 3, 1.0 / y ** 3

    f, g = spec.shape_values(y / x)
    if spec.system_class == SystemClass.GENERALIZED:
        return f / (y * x * x), g / (x * y * y)

    r = math.hypot(x, y)
    cos = x / r
    # H = C r^3 / 4 - h(cot(theta)) / (r cos(theta)), applied as -(x/r^3) H
    H = 0.25 * spec.C * r ** 3 - spec.h_value(x / y) / (r * cos)
    r_cubed = r ** 3
    return (
        -x / r_cubed * H + f / x ** 3,
        -y / r_cubed * H + g / y ** 3,
    )


def cart_rhs(spec: SystemSpec, state: CartState) -> Tuple[float, float]:
    fx, fy = cart_forcing(spec, state.t, state.x, state.y)
    w_sq = spec.w_squared(state.t)
    return fx - w_sq * state.x, fy - w_sq * state.y


def rotate(ax: float, ay: float, theta: float) -> Tuple[float, float]:
    """
    Returns the (radial, transversal) components of the vector (ax, ay).
    """
    cos, sin = math.cos(theta), math.sin(theta)
    return ax * cos + ay * sin, ay * cos - ax * sin


def polar_rhs_derived(spec: SystemSpec, p: PolarState) -> PolarAcceleration:
    """
    The polar accelerations obtained by rotating ``cart_rhs()``:

        r'' - r theta'^2 = a_x cos(theta) + a_y sin(theta)
        r theta'' + 2 r' theta' = a_y cos(theta) - a_x sin(theta)

    This holds for every class, any w(t), C and h.
    """
    state = from_polar(p)
    ax, ay = cart_rhs(spec, state)
    radial, transversal = rotate(ax, ay, p.theta)
    return PolarAcceleration(
        rdd=p.r * p.omega ** 2 + radial,
        thdd=(transversal - 2.0 * p.vr * p.omega) / p.r,
    )


def paper_polar_forcing(
    spec: SystemSpec,
    r: float,
    theta: float,
    prime_reading: PrimeReading = PrimeReading.AS_PRINTED,
) -> Tuple[float, float]:
    """
    Returns the printed right-hand sides of the radial (r'' - r theta'^2) and
    transversal (r theta'' + 2 r' theta') equations. Neither the w(t)^2 term
    nor the C r^3 / 4 part of H appears in the printed forms.
    """
    tan, ct = math.tan(theta), cot(theta)
    sec_sq, cosec_sq = sec(theta) ** 2, cosec(theta) ** 2
    r_cubed = r ** 3

    if spec.system_class == SystemClass.TOY:
        radial = (tan + ct) ** 2 / r_cubed
        if PrimeReading(prime_reading) == PrimeReading.SQUARED:
            # -(1 / 2r^3) ((tan - cot)^2)'
            transversal = -(tan - ct) * (sec_sq + cosec_sq) / r_cubed
        else:
            # -(1 / 2r^3) (tan - cot)'
            transversal = -(sec_sq + cosec_sq) / (2.0 * r_cubed)
        return radial, transversal

    f, g = spec.shape_values(tan)
    radial = (sec_sq * f + cosec_sq * g) / r_cubed
    if spec.system_class == SystemClass.KEPLER_ERMAKOV:
        radial += spec.h_value(ct) / (r_cubed * math.cos(theta))
    # the generalized class is printed with the Kepler-Ermakov transversal law
    transversal = -(sec_sq * tan * f - cosec_sq * ct * g) / r_cubed
    return radial, transversal


def polar_rhs_paper(
    spec: SystemSpec,
    p: PolarState,
    prime_reading: PrimeReading = PrimeReading.AS_PRINTED,
) -> PaperPolarAcceleration:
    """
    The printed polar equations, returned alongside their residual against
    ``polar_rhs_derived()`` (printed minus derived).
    """
    if math.sin(p.theta) == 0.0 or math.cos(p.theta) == 0.0:
        raise SingularConfigurationError(f"trigonometric pole at theta={p.theta!r}")
    radial, transversal = paper_polar_forcing(spec, p.r, p.theta, prime_reading)
    rdd = p.r * p.omega ** 2 + radial
    thdd = (transversal - 2.0 * p.vr * p.omega) / p.r
    derived = polar_rhs_derived(spec, p)
    return PaperPolarAcceleration(
        rdd=rdd,
        thdd=thdd,
        rdd_residual=rdd - derived.rdd,
        thdd_residual=thdd - derived.thdd,
    )


def paper_residual(
    spec: SystemSpec,
    p: PolarState,
    prime_reading: PrimeReading = PrimeReading.AS_PRINTED,
) -> Tuple[PaperPolarAcceleration, PolarAcceleration]:
    """
    Returns the printed and the derived polar accelerations at ``p``; the
    printed one carries the residual between the two.
    """
    return polar_rhs_paper(spec, p, prime_reading), polar_rhs_derived(spec, p)


def phi_integrand(spec: SystemSpec, sigma: float) -> float:
    """
    The derivative of the angle-only potential Phi of the Ermakov-Lewis
    invariant, as a function of s = y/x.
    """
    f, g = spec.shape_values(sigma)
    if spec.system_class == SystemClass.GENERALIZED:
        return 2.0 * (f - g / sigma ** 2)
    return 2.0 * (sigma * f - g / sigma ** 3)


def phi(spec: SystemSpec, s: float) -> float:
    """
    The angle-only potential Phi(s), normalised so that the toy's closed form
    s^2 + 1/s^2 is reproduced by the Kepler-Ermakov class with f = g = 1.
    Quadrature starts from s0 = 1 (or s0 = -1 when s < 0, since the path
    may not cross the singular ray s = 0).
    """
    from .integrate import quadrature

    if spec.system_class == SystemClass.TOY:
        return s * s + 1.0 / (s * s)
    if s == 0.0:
        raise QuadraturePoleError("Phi is singular at s = 0")

    reference = math.copysign(PHI_REFERENCE_POINT, s)
    integral = quadrature(lambda sigma: phi_integrand(spec, sigma), reference, s)
    if spec.system_class == SystemClass.KEPLER_ERMAKOV:
        return 2.0 + integral
    return integral


def ermakov_invariant(spec: SystemSpec, state: CartState) -> float:
    """
    The Ermakov-Lewis invariant I = (L^2 + Phi(y/x)) / 2, with
    L = x vy - y vx. It is conserved for any frequency w(t).
    """
    if state.x == 0.0 or state.y == 0.0:
        raise SingularConfigurationError(
            f"singular configuration x={state.x!r}, y={state.y!r}"
        )
    L = state.angular_momentum
    return 0.5 * (L * L + phi(spec, state.y / state.x))
