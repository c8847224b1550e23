"""Integration and classification of the reduced curves.

The second-order Euler-Lagrange form is integrated everywhere (it is
regular through turning points, where the first-integral slope form is
singular); the slope form is used only inside the period and blow-up
quadratures, after an explicit desingularizing substitution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from .ambient import CN_SO, CN_TORUS, CPN_SO, CPN_TORUS
from .errors import (
    BracketError,
    DegenerateTurningPoint,
    DomainError,
    PreconditionError,
    StiffnessError,
)
from .reduced_ode import (
    InitialCondition,
    ReducedProblem,
    el_acceleration,
    first_integral,
    forbidden_lambda,
    lambda_from_ic,
    slope_radicand,
)

DEFAULT_TOL = 1e-10
DEFAULT_ATOL = 1e-12
_CONSTANT_TOL = 1e-12


@dataclass(frozen=True)
class Classification:
    kind: str  # constant | closed | complete | blowup
    p: int | None = None
    q: int | None = None
    theta_max: float | None = None


@dataclass(frozen=True)
class Trajectory:
    """A solved reduced curve on a strictly increasing theta grid."""

    problem: ReducedProblem
    theta: np.ndarray
    x: np.ndarray
    xp: np.ndarray
    lam: float
    drift_max: float
    classification: Classification
    dense: object = None  # solve_ivp OdeSolution, when available

    def __len__(self):
        return self.theta.size


def _grid_size(span: float, max_points: int = 40001) -> int:
    return int(min(max_points, max(2001, round(span / 1e-3) + 1)))


def integrate(
    problem: ReducedProblem,
    ic: InitialCondition,
    theta_span: float,
    tol: float = DEFAULT_TOL,
    atol: float = DEFAULT_ATOL,
    escape_radius: float | None = None,
    n_points: int | None = None,
) -> Trajectory:
    """Adaptive integration of the reduced Euler-Lagrange equation.

    Integrates theta in [0, theta_span] with an 8th-order embedded pair,
    records the first-integral drift on a uniform output grid, and stops
    early at the escape event for the unbounded flat cases.
    """
    lam = lambda_from_ic(problem, ic)
    adm = forbidden_lambda(problem)
    if not adm.admissible:
        raise PreconditionError(f"forbidden motion constant: {adm.reason}")
    profile = problem.profile
    a = profile.check(ic.a)

    def rhs(theta, y):
        return [y[1], el_acceleration(problem, y[0], y[1])]

    events = []

    def lower_collar(theta, y):
        return y[0] - (profile.x_min + 10.0 * profile.collar)

    lower_collar.terminal = True
    events.append(lower_collar)
    if math.isfinite(profile.x_max):

        def upper_collar(theta, y):
            return (profile.x_max - 10.0 * profile.collar) - y[0]

        upper_collar.terminal = True
        events.append(upper_collar)
    else:
        cap = escape_radius if escape_radius is not None else 1e3 * max(a, 1.0)

        def escape(theta, y):
            return y[0] - cap

        escape.terminal = True
        events.append(escape)

    n = n_points if n_points is not None else _grid_size(theta_span)
    t_eval = np.linspace(0.0, theta_span, n)
    sol = solve_ivp(
        rhs,
        (0.0, theta_span),
        [ic.a, ic.b],
        method="DOP853",
        rtol=tol,
        atol=atol,
        dense_output=True,
        events=events,
        t_eval=t_eval,
    )
    if sol.status == -1:
        raise StiffnessError(sol.message)

    theta = sol.t
    x, xp = sol.y
    escaped = (not math.isfinite(profile.x_max)) and sol.t_events[-1].size > 0
    hit_collar = sol.t_events[0].size > 0 or (
        math.isfinite(profile.x_max) and sol.t_events[1].size > 0
    )
    if escaped:
        # keep the grid strictly inside the reached span, append the event state
        t_end = sol.t_events[-1][0]
        keep = theta < t_end
        theta = np.append(theta[keep], t_end)
        x = np.append(x[keep], sol.y_events[-1][0][0])
        xp = np.append(xp[keep], sol.y_events[-1][0][1])
    elif hit_collar:
        raise DomainError(
            "trajectory entered the boundary collar; admissible constants "
            "cannot reach it, so the configuration is inconsistent"
        )

    H = np.array([first_integral(problem, xi, vi) for xi, vi in zip(x, xp)])
    drift_max = float(np.max(np.abs(H + lam))) if H.size else 0.0

    if abs(ic.b) < _CONSTANT_TOL and abs(el_acceleration(problem, a, 0.0)) < _CONSTANT_TOL:
        cls = Classification("constant")
    elif escaped:
        cls = Classification("blowup", theta_max=float(theta[-1]))
    else:
        cls = Classification("complete")
    return Trajectory(problem, theta, x, xp, lam, drift_max, cls, dense=sol.sol)


def turning_radius(problem: ReducedProblem, a: float) -> float:
    """Adjacent turning point of a turning-point start at a.

    Returns the largest root of the slope radicand below a when the start
    is a maximum (f'(a) < 0), the smallest root above a when it is a
    minimum; a degenerate f'(a) = 0 start is the constant solution and
    returns a itself.
    """
    profile = problem.profile
    a = profile.check(a)
    f = lambda x: slope_radicand(problem, x)
    fa = f(a)
    scale = max(abs(problem.B(a)), 1e-30)
    if abs(fa) > 1e-8 * scale:
        raise PreconditionError("turning_radius needs a turning-point start, f(a) = 0")
    h = 1e-7 * max(1.0, abs(a))
    fprime = (f(a + h) - f(a - h)) / (2.0 * h)
    # at a double root the central difference is roundoff noise of order
    # eps * scale / h ~ 1e-7 scale, so the degeneracy cut must sit above it
    if abs(fprime) < 1e-6 * scale:
        return a
    step = 1e-4 * max(1.0, abs(a))
    if fprime < 0.0:
        lo = profile.x_min + 2.0 * profile.collar
        grid = np.linspace(a - step, lo, 4000)
    else:
        hi = profile.x_max - 2.0 * profile.collar if math.isfinite(profile.x_max) \
            else a + 100.0 * max(1.0, abs(a))
        grid = np.linspace(a + step, hi, 4000)
    prev_x, prev_f = a, fa
    for xg in grid:
        fg = f(xg)
        if fg < 0.0:
            left, right = sorted((prev_x, xg))
            return brentq(f, left, right, xtol=1e-13, rtol=8.9e-16)
        prev_x, prev_f = xg, fg
    raise BracketError("no sign change of the slope radicand was found")


def _radicand_slope_at(problem, x0, sign):
    f = lambda x: slope_radicand(problem, x)
    h = 1e-7 * max(1.0, abs(x0))
    return sign * (f(x0 + h) - f(x0 - h)) / (2.0 * h)


def period_omega(problem: ReducedProblem, a: float, epsabs: float = 1e-12) -> float:
    """Half-oscillation angle between the turning points at a and b_hat.

    Both endpoints are simple zeros of the radicand f; the substitution
    x = b + (a - b) sin^2 s removes the inverse-square-root singularities,
    leaving 2 (a - b) sqrt(A) (lambda + K C / 2) / (sqrt(B) sqrt(q)) with
    q = f / ((x - b)(a - x)) regular and positive.
    """
    lam = problem.require_lambda()
    b_hat = turning_radius(problem, a)
    if b_hat == a:
        raise DegenerateTurningPoint("start coincides with a constant solution")
    lo, hi = sorted((a, b_hat))
    f = lambda x: slope_radicand(problem, x)
    for end, sign in ((lo, 1.0), (hi, -1.0)):
        if _radicand_slope_at(problem, end, sign) < 1e-10:
            raise DegenerateTurningPoint("non-simple radicand zero at an endpoint")
    width = hi - lo
    # endpoint limits of q = f / ((x - lo)(hi - x)); the ratio cancels to
    # roundoff noise within ~1e-7 width of a simple zero
    q_lo = _radicand_slope_at(problem, lo, 1.0) / width
    q_hi = _radicand_slope_at(problem, hi, -1.0) / width
    edge = 1e-7 * width

    def integrand(s):
        sin2 = math.sin(s) ** 2
        x = lo + width * sin2
        x = min(max(x, math.nextafter(lo, hi)), math.nextafter(hi, lo))
        if x - lo < edge:
            q = q_lo
        elif hi - x < edge:
            q = q_hi
        else:
            q = f(x) / ((x - lo) * (hi - x))
            if q <= 0.0:
                q = q_lo if x - lo < hi - x else q_hi
        denom = lam + 0.5 * problem.K * problem.C(x)
        return 2.0 * math.sqrt(problem.A(x)) * denom / (
            math.sqrt(problem.B(x)) * math.sqrt(q)
        )

    with warnings.catch_warnings():
        # endpoint roundoff chatter; accuracy is cross-checked by shooting
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(
            integrand, 0.0, math.pi / 2, epsabs=epsabs, epsrel=1e-12, limit=300
        )
    return abs(val)


def theta_max(problem: ReducedProblem, a: float, epsabs: float = 1e-12) -> float:
    """Asymptote angle of the monotone-escape solutions of the flat cases."""
    if problem.case.variant not in (CN_SO, CN_TORUS):
        raise PreconditionError("theta_max applies to the flat cases only")
    lam = problem.require_lambda()
    a = problem.profile.check(a)
    f = lambda x: slope_radicand(problem, x)
    fa = f(a)
    scale = max(abs(problem.B(a)), 1e-30)
    if abs(fa) > 1e-8 * scale:
        raise PreconditionError("theta_max expects a turning-point start, f(a) = 0")
    if _radicand_slope_at(problem, a, 1.0) <= 0.0:
        raise PreconditionError("not in the monotone-escape regime: f'(a) <= 0")
    probe = np.geomspace(a * (1.0 + 1e-6), 1e6 * a, 200)
    if any(f(x) <= 0.0 for x in probe):
        raise PreconditionError("radicand not positive above a: nonmonotone regime")

    def w(x):
        denom = lam + 0.5 * problem.K * problem.C(x)
        return math.sqrt(problem.A(x)) * denom / (
            math.sqrt(problem.B(x)) * math.sqrt(max(f(x), 1e-300))
        )

    mid = 2.0 * a
    q_a = _radicand_slope_at(problem, a, 1.0)
    edge = 1e-7 * a

    def integrand_lower(s):
        x = a + (mid - a) * math.sin(s) ** 2
        x = min(max(x, math.nextafter(a, mid)), mid)
        q1 = q_a if x - a < edge else f(x) / (x - a)
        if q1 <= 0.0:
            q1 = q_a
        denom = lam + 0.5 * problem.K * problem.C(x)
        return 2.0 * math.sqrt(mid - a) * math.cos(s) * math.sqrt(problem.A(x)) * denom / (
            math.sqrt(problem.B(x)) * math.sqrt(q1)
        )

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        part1, _ = quad(
            integrand_lower, 0.0, math.pi / 2, epsabs=epsabs, epsrel=1e-12, limit=300
        )

    def integrand_upper(v):
        if v <= 0.0:
            return 0.0
        x = 1.0 / v
        return w(x) / (v * v)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        part2, _ = quad(
            integrand_upper, 0.0, 1.0 / mid, epsabs=epsabs, epsrel=1e-12, limit=300
        )
    return abs(part1) + abs(part2)


def shooting_period(
    problem: ReducedProblem, a: float, tol: float = 1e-12, span: float = 200.0
) -> float:
    """Half-oscillation angle by direct integration: the first positive
    zero of x'.  The radial turning point is a tangential touch of
    x = b_hat, so the transversal x' = 0 crossing is the robust event."""
    lam = lambda_from_ic(problem, InitialCondition(a, 0.0))
    adm = forbidden_lambda(problem)
    if not adm.admissible:
        raise PreconditionError(f"forbidden motion constant: {adm.reason}")
    accel0 = el_acceleration(problem, a, 0.0)
    if accel0 == 0.0:
        raise DegenerateTurningPoint("constant solution has no oscillation period")

    def rhs(theta, y):
        return [y[1], el_acceleration(problem, y[0], y[1])]

    def turn(theta, y):
        return y[1]

    turn.terminal = True
    turn.direction = -1.0 if accel0 > 0.0 else 1.0
    sol = solve_ivp(
        rhs, (0.0, span), [a, 0.0], method="DOP853", rtol=tol, atol=1e-14, events=turn
    )
    if sol.t_events[0].size == 0:
        raise BracketError("no turning event within the integration span")
    return float(sol.t_events[0][0])


def extend_by_reflection(traj: Trajectory) -> Trajectory:
    """Even extension of a turning-point-start trajectory to negative theta."""
    if abs(traj.xp[0]) > 1e-10:
        raise PreconditionError("reflection extension needs a turning-point start")
    theta = np.concatenate([-traj.theta[:0:-1], traj.theta])
    x = np.concatenate([traj.x[:0:-1], traj.x])
    xp = np.concatenate([-traj.xp[:0:-1], traj.xp])
    return replace(traj, theta=theta, x=x, xp=xp, dense=None)


def best_rational(value: float, q_max: int) -> tuple[int, int]:
    """Best rational approximation p/q of value with q <= q_max."""
    fr = Fraction(value).limit_denominator(q_max)
    return fr.numerator, fr.denominator


def closure_residual(
    problem: ReducedProblem, a: float, p: int, q: int, tol: float = 1e-12
) -> float:
    """Re-integrate over the full closing span 2 q Omega_a = 2 p pi and
    return the distance of the end state from the start state."""
    span = 2.0 * p * math.pi
    traj = integrate(problem, InitialCondition(a, 0.0), span, tol=tol, atol=1e-14)
    return float(abs(traj.x[-1] - a) + abs(traj.xp[-1]))


def _rationals_between(lo: float, hi: float, q_max: int):
    lo, hi = sorted((lo, hi))
    out = set()
    for q in range(1, q_max + 1):
        p_lo = math.floor(lo * q) + 1
        p_hi = math.ceil(hi * q) - 1
        for p in range(p_lo, p_hi + 1):
            if math.gcd(p, q) == 1 and lo < p / q < hi:
                out.add((p, q))
    return sorted(out, key=lambda pq: (pq[1], pq[0]))


def closed_search(
    problem_factory,
    a_grid,
    q_max: int = 64,
    tol_rat: float | None = None,
):
    """Scan the period ratio Omega_a / pi over a grid of turning-point
    starts and refine every rational crossing with denominator <= q_max.

    ``problem_factory()`` must return a fresh ReducedProblem.  Returns a
    list of (a, p, q) with |Omega_a/pi - p/q| below the rational tolerance
    (default 1e-9 q^2) after bisection refinement.
    """
    samples = []
    for a in a_grid:
        problem = problem_factory()
        try:
            lambda_from_ic(problem, InitialCondition(a, 0.0))
            if not forbidden_lambda(problem).admissible:
                continue
            ratio = period_omega(problem, a) / math.pi
        except (PreconditionError, DegenerateTurningPoint, BracketError, DomainError):
            continue
        samples.append((float(a), ratio))
    if not samples:
        raise PreconditionError("no admissible starts in the scanned grid")

    def ratio_at(a):
        problem = problem_factory()
        lambda_from_ic(problem, InitialCondition(a, 0.0))
        return period_omega(problem, a) / math.pi

    hits = []
    seen = set()
    for (a0, r0), (a1, r1) in zip(samples, samples[1:]):
        for p, q in _rationals_between(r0, r1, q_max):
            target = p / q
            try:
                a_star = brentq(
                    lambda a: ratio_at(a) - target, a0, a1, xtol=1e-12, rtol=8.9e-16
                )
            except (ValueError, PreconditionError, DegenerateTurningPoint, BracketError):
                continue
            tol = tol_rat if tol_rat is not None else 1e-9 * q * q
            if abs(ratio_at(a_star) - target) <= tol:
                key = (round(a_star, 10), p, q)
                if key not in seen:
                    seen.add(key)
                    hits.append((a_star, p, q))
    return hits
