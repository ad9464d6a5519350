import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .constants import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    INTEGRATOR_METHOD,
    MIN_THETA_SAMPLES,
    QUADRATURE_LIMIT,
    QUADRATURE_TOL,
    RK45_STAGE_EVALUATIONS,
    SINGULARITY_GUARD,
    THETA_ROOT_TOL,
    SystemClass,
)
from .exceptions import (
    ErmakovError,
    NonFiniteStateError,
    QuadratureError,
    QuadraturePoleError,
    RootFindingError,
    SingularityError,
    StepSizeUnderflowError,
    TurningPointError,
)
from .systems import (
    CartState,
    PolarState,
    SystemSpec,
    cart_forcing,
    ermakov_invariant,
    from_polar,
    phi,
    phi_integrand,
    polar_rhs_derived,
    to_polar,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegrationStats:
    """
    Step counts of one solve. scipy does not report rejected steps, so
    ``rejections_estimate`` is inferred from ``nfev``: attempts beyond the
    accepted steps, assuming every attempt cost a full set of stages.
    """

    steps: int
    rejections_estimate: int
    nfev: int
    min_step: float


def integration_stats(solution) -> IntegrationStats:
    steps = max(len(solution.t) - 1, 0)
    # RK45 spends two evaluations choosing the first step, then six per
    # attempted step (first-same-as-last); attempts beyond the accepted
    # steps were rejected
    attempts = max(solution.nfev - 2, 0) // RK45_STAGE_EVALUATIONS
    return IntegrationStats(
        steps=steps,
        rejections_estimate=max(attempts - steps, 0),
        nfev=int(solution.nfev),
        min_step=float(np.diff(solution.t).min()) if steps else 0.0,
    )


def check_solution(solution) -> None:
    if solution.status == -1:
        if "step size" in solution.message.lower():
            raise StepSizeUnderflowError(solution.message)
        raise NonFiniteStateError(solution.message)
    if not np.all(np.isfinite(solution.y)):
        raise NonFiniteStateError("integration produced a non-finite state")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    A time-sampled Cartesian solution. ``states`` has one row (x, y, vx, vy)
    per accepted step node in ``t``; ``solution`` is scipy's dense output,
    built from the order-matched continuous extension of every step.
    """

    spec: SystemSpec
    t: np.ndarray
    states: np.ndarray
    accelerations: np.ndarray
    solution: object = field(repr=False)
    stats: IntegrationStats
    singular_at: Optional[float] = None

    @property
    def terminated_early(self) -> bool:
        return self.singular_at is not None

    def __len__(self) -> int:
        return len(self.t)

    def sample(self, index: int) -> CartState:
        return CartState.from_array(self.t[index], self.states[index])

    def state_at(self, t: float) -> CartState:
        """
        Returns the state at time ``t``. Accepted nodes are returned as
        stored; anything in between comes from the dense output.
        """
        if not self.t[0] <= t <= self.t[-1]:
            raise ValueError(f"t={t!r} lies outside [{self.t[0]!r}, {self.t[-1]!r}]")
        index = int(np.searchsorted(self.t, t))
        if index < len(self.t) and self.t[index] == t:
            return self.sample(index)
        return CartState.from_array(t, self.solution(t))

    def angular_momentum(self) -> np.ndarray:
        x, y, vx, vy = self.states.T
        return x * vy - y * vx

    def theta(self) -> np.ndarray:
        return np.unwrap(np.arctan2(self.states[:, 1], self.states[:, 0]))

    def invariant_series(self) -> np.ndarray:
        """
        The Ermakov-Lewis invariant at every node. For the classes whose
        potential needs quadrature, Phi is accumulated node to node.
        """
        L = self.angular_momentum()
        s = self.states[:, 1] / self.states[:, 0]
        if self.spec.system_class == SystemClass.TOY:
            return 0.5 * (L ** 2 + s ** 2 + 1.0 / s ** 2)

        def integrand(sigma):
            return phi_integrand(self.spec, sigma)

        potential = np.empty_like(s)
        potential[0] = phi(self.spec, s[0])
        for i in range(1, len(s)):
            potential[i] = potential[i - 1] + quadrature(integrand, s[i - 1], s[i])
        return 0.5 * (L ** 2 + potential)

    def invariant_at(self, index: int) -> float:
        return ermakov_invariant(self.spec, self.sample(index))

    def raise_for_singularity(self) -> None:
        if self.singular_at is not None:
            raise SingularityError(
                f"trajectory approached a singular ray at t={self.singular_at!r}",
                t=self.singular_at,
            )


def singularity_guard(t, y):
    return min(abs(y[0]), abs(y[1])) - SINGULARITY_GUARD


singularity_guard.terminal = True
singularity_guard.direction = -1


def integrate_cart(
    spec: SystemSpec,
    ic: CartState,
    t_end: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Trajectory:
    """
    Integrates the Cartesian dynamics of ``spec`` from ``ic`` to ``t_end``
    with the Dormand-Prince 5(4) pair. If min(|x|, |y|) drops below the
    singularity guard, integration stops there and the returned trajectory
    has ``singular_at`` set.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    if t_end <= ic.t:
        raise ValueError(f"t_end={t_end!r} must exceed the initial time {ic.t!r}")
    if min(abs(ic.x), abs(ic.y)) < SINGULARITY_GUARD:
        raise SingularityError(f"initial state ({ic.x!r}, {ic.y!r}) is singular")

    w = spec.w

    def rhs(t, y):
        fx, fy = cart_forcing(spec, t, y[0], y[1])
        w_sq = w.evaluate(t) ** 2
        return [y[2], y[3], fx - w_sq * y[0], fy - w_sq * y[1]]

    solution = solve_ivp(
        rhs,
        (ic.t, t_end),
        ic.as_array(),
        method=INTEGRATOR_METHOD,
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=singularity_guard,
    )
    check_solution(solution)

    singular_at = None
    if solution.status == 1 and len(solution.t_events[0]):
        singular_at = float(solution.t_events[0][0])
        logger.info("singularity guard triggered at t=%r", singular_at)

    accelerations = np.array(
        [rhs(t, y)[2:] for t, y in zip(solution.t, solution.y.T)]
    )
    stats = integration_stats(solution)
    logger.debug(
        "integrated %s to t=%r: %d steps, ~%d rejections, min step %r",
        spec.system_class,
        solution.t[-1],
        stats.steps,
        stats.rejections_estimate,
        stats.min_step,
    )
    return Trajectory(
        spec=spec,
        t=solution.t,
        states=solution.y.T.copy(),
        accelerations=accelerations,
        solution=solution.sol,
        stats=stats,
        singular_at=singular_at,
    )


@dataclass(frozen=True, eq=False)
class PolarTrajectory:
    spec: SystemSpec
    t: np.ndarray
    states: np.ndarray
    solution: object = field(repr=False)
    stats: IntegrationStats

    def state_at(self, t: float) -> PolarState:
        index = int(np.searchsorted(self.t, t))
        if index < len(self.t) and self.t[index] == t:
            return PolarState.from_array(t, self.states[index])
        return PolarState.from_array(t, self.solution(t))

    def cart_state_at(self, t: float) -> CartState:
        return from_polar(self.state_at(t))


def integrate_polar(
    spec: SystemSpec,
    ic: PolarState,
    t_end: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> PolarTrajectory:
    """
    Integrates the polar equations of ``polar_rhs_derived()`` directly;
    used to cross-check the Cartesian integration.
    """

    def rhs(t, y):
        accel = polar_rhs_derived(spec, PolarState.from_array(t, y))
        return [y[2], y[3], accel.rdd, accel.thdd]

    solution = solve_ivp(
        rhs,
        (ic.t, t_end),
        ic.as_array(),
        method=INTEGRATOR_METHOD,
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    check_solution(solution)
    return PolarTrajectory(
        spec=spec,
        t=solution.t,
        states=solution.y.T.copy(),
        solution=solution.sol,
        stats=integration_stats(solution),
    )


def quadrature(
    fn: Callable[[float], float], a: float, b: float, tol: float = QUADRATURE_TOL
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature of ``fn`` over [a, b] (signed, so
    b < a is allowed). Raises ``QuadraturePoleError`` when ``fn`` is not
    finite somewhere it is sampled and ``QuadratureError`` when the error
    estimate cannot be brought below ``tol``.
    """
    if a == b:
        return 0.0

    def checked(x):
        try:
            value = fn(x)
        except (ErmakovError, ZeroDivisionError) as e:
            raise QuadraturePoleError(f"integrand undefined at {x!r}: {e}", point=x)
        if not math.isfinite(value):
            raise QuadraturePoleError(f"integrand not finite at {x!r}", point=x)
        return value

    result = quad(
        checked, a, b, epsabs=tol, epsrel=0.0, limit=QUADRATURE_LIMIT, full_output=1
    )
    value, error = result[0], result[1]
    if error > tol:
        message = result[3] if len(result) > 3 else "error estimate above tolerance"
        raise QuadratureError(
            f"quadrature over [{a!r}, {b!r}] did not converge: {message}",
            error_estimate=error,
        )
    logger.debug("quadrature over [%r, %r] = %r (+/- %r)", a, b, value, error)
    return float(value)


@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    """
    A trajectory resampled on a uniform theta grid, carrying u = 1/r and its
    theta-derivatives together with the angular momentum. ``u2`` (the
    conserved label L0 of the reduced system) is attached by the angular law.
    """

    trajectory: Trajectory
    theta: np.ndarray
    t: np.ndarray
    u: np.ndarray
    u_theta: np.ndarray
    u_theta_theta: np.ndarray
    L: np.ndarray
    vr: np.ndarray

    @property
    def L_sq(self) -> np.ndarray:
        return self.L ** 2

    @property
    def r(self) -> np.ndarray:
        return 1.0 / self.u

    def kinematic_residual(self) -> np.ndarray:
        """
        r' + L u_theta at every node; zero by construction of u_theta.
        """
        return self.vr + self.L * self.u_theta

    def u_at(self, theta: float) -> float:
        t = time_at_theta(self.trajectory, theta)
        state = self.trajectory.state_at(t)
        return 1.0 / math.hypot(state.x, state.y)


def angle_near(x: float, y: float, reference: float) -> float:
    """
    atan2(y, x) shifted by a multiple of 2 pi to lie nearest ``reference``.
    """
    angle = math.atan2(y, x)
    return angle + 2.0 * math.pi * round((reference - angle) / (2.0 * math.pi))


def check_theta_monotone(traj: Trajectory) -> float:
    """
    Returns the sign of theta' along ``traj``, raising ``TurningPointError``
    if the angular momentum vanishes or changes sign.
    """
    L = traj.angular_momentum()
    if np.any(L == 0.0):
        raise TurningPointError("angular momentum vanishes: theta' = 0")
    signs = np.sign(L)
    if np.any(signs != signs[0]):
        index = int(np.argmax(signs != signs[0]))
        raise TurningPointError(
            f"theta' changes sign near t={traj.t[index]!r}", t=float(traj.t[index])
        )
    theta = traj.theta()
    if np.any(signs[0] * np.diff(theta) <= 0.0):
        raise TurningPointError("theta is not strictly monotone along the trajectory")
    return float(signs[0])


def time_at_theta(traj: Trajectory, theta: float, direction: Optional[float] = None) -> float:
    """
    Locates the time at which the trajectory crosses ``theta`` by root
    finding on the dense output within the bracketing step.
    """
    direction = direction or check_theta_monotone(traj)
    node_theta = traj.theta()
    oriented = direction * node_theta
    target = direction * theta
    if not oriented[0] <= target <= oriented[-1]:
        raise RootFindingError(f"theta={theta!r} lies outside the trajectory's span")

    index = int(np.searchsorted(oriented, target))
    if oriented[index] == target:
        return float(traj.t[index])
    lo, hi = index - 1, index
    reference = node_theta[lo]

    def offset(t):
        state = traj.solution(t)
        return angle_near(state[0], state[1], reference) - theta

    try:
        t = brentq(offset, traj.t[lo], traj.t[hi], xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except ValueError as e:
        raise RootFindingError(f"could not bracket theta={theta!r}: {e}")
    if abs(offset(t)) > THETA_ROOT_TOL:
        raise RootFindingError(
            f"theta crossing located to {abs(offset(t))!r}, above {THETA_ROOT_TOL!r}"
        )
    return float(t)


def resample_by_theta(traj: Trajectory, n: int) -> ReducedTrajectory:
    """
    Resamples ``traj`` on ``n`` uniformly spaced angles between its end
    angles. At each angle u = 1/r, u_theta = -r'/L and

        u_theta_theta = -(r'' + L' u_theta) / (L^2 u^2),   L' = r * (transversal acceleration)

    are evaluated pointwise from the state and the polar accelerations.
    """
    if n < MIN_THETA_SAMPLES:
        raise ValueError(f"at least {MIN_THETA_SAMPLES} theta samples are required")
    direction = check_theta_monotone(traj)
    node_theta = traj.theta()
    grid = np.linspace(node_theta[0], node_theta[-1], n)
    grid[0], grid[-1] = node_theta[0], node_theta[-1]

    rows = []
    for theta in grid:
        t = time_at_theta(traj, theta, direction)
        p = to_polar(traj.state_at(t))
        accel = polar_rhs_derived(traj.spec, p)
        L = p.angular_momentum
        u = 1.0 / p.r
        u_theta = -p.vr / L
        L_dot = p.r * (p.r * accel.thdd + 2.0 * p.vr * p.omega)
        u_theta_theta = -(accel.rdd + L_dot * u_theta) / (L * L * u * u)
        rows.append((t, u, u_theta, u_theta_theta, L, p.vr))

    t, u, u_theta, u_theta_theta, L, vr = (np.array(c) for c in zip(*rows))
    if np.any(np.diff(t) <= 0.0):
        raise RootFindingError("resampled times are not strictly increasing")
    return ReducedTrajectory(
        trajectory=traj,
        theta=grid,
        t=t,
        u=u,
        u_theta=u_theta,
        u_theta_theta=u_theta_theta,
        L=L,
        vr=vr,
    )
