"""The reduced H-minimal variational problem of each case.

All four cases share one variational structure in the canonical radial
coordinate x:

    L(x, x') = sqrt(A(x) x'^2 + B(x)) - (K/2) C(x)

with A = h_xx and B = h_tt the Hsiang-Lawson coefficients and C the area
term (sin^2 x for the projective cases, x^2 for the flat ones).  The
Legendre transform gives the conserved Hamiltonian

    H = -B / sqrt(A x'^2 + B) + (K/2) C = -lambda,

and the Euler-Lagrange acceleration follows from the same three
coefficient functions, so the torus cases need no separately transcribed
equation of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .ambient import CN_SO, CN_TORUS, CPN_SO, CPN_TORUS, ActionCase
from .errors import (
    DomainError,
    NumericalDomainError,
    PreconditionError,
    SingularSlopeError,
    StateError,
    TurningRegionError,
)
from .reduction import MetricProfile, make_profile

_SLOPE_DENOM_TOL = 1e-13


@dataclass(frozen=True)
class InitialCondition:
    """Radial value and radial derivative at theta = 0."""

    a: float
    b: float = 0.0

    @property
    def is_turning_point(self) -> bool:
        return self.b == 0.0


@dataclass
class ReducedProblem:
    """A case, its H-minimal constant K, and (once set) the motion constant."""

    case: ActionCase
    K: float
    profile: MetricProfile = None
    lam: float | None = None

    def __post_init__(self):
        if self.K == 0.0:
            raise PreconditionError("the H-minimal constant K must be nonzero")
        if self.profile is None:
            self.profile = make_profile(self.case)

    # -- coefficient functions ------------------------------------------
    def A(self, x):
        return self.profile.h_xx(x)

    def B(self, x):
        return self.profile.h_tt(x)

    def C(self, x):
        if self.case.variant in (CPN_SO, CPN_TORUS):
            return math.sin(x) ** 2
        return x * x

    def dA(self, x):
        return self.profile.dh_xx(x)

    def dB(self, x):
        return self.profile.dh_tt(x)

    def dC(self, x):
        if self.case.variant in (CPN_SO, CPN_TORUS):
            return 2.0 * math.sin(x) * math.cos(x)
        return 2.0 * x

    def require_lambda(self) -> float:
        if self.lam is None:
            raise StateError("the motion constant lambda is not set")
        return self.lam


def lagrangian_density(problem: ReducedProblem, x: float, xp: float) -> float:
    """Integrand of the case's reduced functional at (x, x')."""
    x = problem.profile.check(x)
    return math.sqrt(problem.A(x) * xp * xp + problem.B(x)) - 0.5 * problem.K * problem.C(x)


def legendre_momentum(problem: ReducedProblem, x: float, xp: float) -> float:
    """p = dL/dx' at (x, x')."""
    x = problem.profile.check(x)
    A, B = problem.A(x), problem.B(x)
    return A * xp / math.sqrt(A * xp * xp + B)


def legendre_velocity(problem: ReducedProblem, x: float, p: float) -> float:
    """Invert the Legendre transform: x' with the sign of p."""
    x = problem.profile.check(x)
    A, B = problem.A(x), problem.B(x)
    rad = A - p * p
    if rad <= 0.0:
        raise NumericalDomainError("momentum exceeds its bound p^2 < A(x)")
    return p * math.sqrt(B / (A * rad))


def first_integral(problem: ReducedProblem, x: float, xp: float) -> float:
    """Hamiltonian H(x, x'); constant (equal to -lambda) along solutions."""
    x = problem.profile.check(x)
    A, B = problem.A(x), problem.B(x)
    return -B / math.sqrt(A * xp * xp + B) + 0.5 * problem.K * problem.C(x)


def hamiltonian_from_momentum(problem: ReducedProblem, x: float, p: float) -> float:
    """H(x, p) in momentum form."""
    x = problem.profile.check(x)
    A, B = problem.A(x), problem.B(x)
    rad = A - p * p
    if rad < 0.0:
        raise NumericalDomainError("momentum exceeds its bound p^2 <= A(x)")
    return -math.sqrt(B * rad / A) + 0.5 * problem.K * problem.C(x)


def lambda_from_ic(problem: ReducedProblem, ic: InitialCondition) -> float:
    """Motion constant determined by the initial condition; stored on the
    problem."""
    a = problem.profile.check(ic.a)
    if problem.case.variant == CN_TORUS and ic.a <= math.sqrt(problem.case.sigma):
        raise PreconditionError("cn_torus start must satisfy a > sqrt(sigma)")
    A, B = problem.A(a), problem.B(a)
    lam = B / math.sqrt(A * ic.b * ic.b + B) - 0.5 * problem.K * problem.C(a)
    problem.lam = lam
    return lam


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    reason: str = ""


def forbidden_lambda(problem: ReducedProblem) -> Admissibility:
    """Global-existence test for the stored motion constant.

    Projective cases: lambda must lie outside the closed interval between
    0 and -K/2.  cn_so: lambda != 0.  cn_torus: lambda not in
    {0} U {-(K/2) c_i}.
    """
    lam = problem.require_lambda()
    K = problem.K
    variant = problem.case.variant
    if variant in (CPN_SO, CPN_TORUS):
        lo, hi = min(0.0, -0.5 * K), max(0.0, -0.5 * K)
        if lo <= lam <= hi:
            return Admissibility(False, f"lambda = {lam} in the closed interval [{lo}, {hi}]")
        return Admissibility(True)
    if lam == 0.0:
        return Admissibility(False, "lambda = 0")
    if variant == CN_TORUS:
        for i, ci in enumerate(problem.case.c):
            if lam == -0.5 * K * ci:
                return Admissibility(False, f"lambda = -(K/2)c_{i + 1}")
    return Admissibility(True)


def el_acceleration(problem: ReducedProblem, x: float, xp: float) -> float:
    """x'' from the Euler-Lagrange equation of the reduced functional."""
    x = problem.profile.check(x)
    A, B, dA, dB = problem.A(x), problem.B(x), problem.dA(x), problem.dB(x)
    if A <= 0.0 or B <= 0.0:
        raise DomainError("degenerate leading coefficient")
    S = math.sqrt(A * xp * xp + B)
    num = A * dB * xp * xp + 0.5 * B * dB - 0.5 * dA * B * xp * xp \
        - 0.5 * problem.K * problem.dC(x) * S**3
    return num / (A * B)


def slope_radicand(problem: ReducedProblem, x: float) -> float:
    """f(x) = B(x) - (lambda + (K/2) C(x))^2, the squared-slope radicand."""
    lam = problem.require_lambda()
    x = problem.profile.check(x)
    d = lam + 0.5 * problem.K * problem.C(x)
    return problem.B(x) - d * d


def radial_slope(problem: ReducedProblem, x: float, branch: int = 1) -> float:
    """x' recovered from the first integral on the given branch (+1/-1)."""
    lam = problem.require_lambda()
    x = problem.profile.check(x)
    A, B = problem.A(x), problem.B(x)
    denom = lam + 0.5 * problem.K * problem.C(x)
    if abs(denom) < _SLOPE_DENOM_TOL * (1.0 + abs(lam)):
        raise SingularSlopeError("lambda + (K/2) C(x) = 0 at the queried point")
    f = B - denom * denom
    if f < 0.0:
        raise TurningRegionError("queried point lies beyond a turning point")
    return branch * math.sqrt(B * f / A) / denom


def constant_solutions(problem: ReducedProblem):
    """Radial values of the constant solutions of the reduced equation.

    cn_so has the closed form (K/(n+1))^{1/(n-1)} for K > 0 and none
    otherwise; the remaining cases are solved by a bracketed root scan of
    the stationarity condition B'(x) = K C'(x) sqrt(B(x)).
    """
    case, K = problem.case, problem.K
    if case.variant == CN_SO:
        if K <= 0.0:
            return []
        return [(K / (case.n + 1)) ** (1.0 / (case.n - 1))]

    def g(x):
        return problem.dB(x) - K * problem.dC(x) * math.sqrt(problem.B(x))

    profile = problem.profile
    if math.isfinite(profile.x_max):
        grid = np.linspace(profile.x_min + 1e-6, profile.x_max - 1e-6, 600)
    else:
        grid = np.linspace(profile.x_min + 1e-6, profile.x_min + 30.0, 600)
    vals = np.array([g(x) for x in grid])
    roots = []
    for i in range(grid.size - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(g, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    return sorted(set(round(r, 13) for r in roots))
