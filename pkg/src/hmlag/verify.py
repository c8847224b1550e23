"""Independent finite-difference verification of the geometric claims.

Nothing here calls the Euler-Lagrange formulas: curvature checks use only
the metric coefficient evaluators, and ambient checks use only immersion
evaluators sampled by central differences.  That makes this module an
oracle for the solver rather than a restatement of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import AmbientPoint, kaehler_form
from .errors import DegenerateParamError, PreconditionError, StepError
from .lift import ImmersionCloud
from .reduction import MetricProfile
from .solver import Trajectory

_RANK_TOL = 1e-12
_LAGRANGIAN_GUARD = 1e-6


# -- Lagrangian condition -----------------------------------------------

def lagrangian_residual(cloud: ImmersionCloud) -> float:
    """max |omega(e_i, e_j)| over all samples and frame pairs."""
    worst = 0.0
    for _, point, frame in cloud.samples:
        k = frame.shape[0]
        for i in range(k):
            for j in range(i + 1, k):
                worst = max(worst, abs(kaehler_form(point, frame[i], frame[j])))
    return worst


# -- curvature of curves in a 2D diagonal metric ------------------------

def geodesic_curvature(E, G, t, x, th, h: float = 1e-4) -> np.ndarray:
    """Signed geodesic curvature of the curve (x(t), th(t)) in the metric
    E(x) dx^2 + G(x) dth^2.

    E and G are scalar evaluators of the first coordinate; their
    derivatives are taken by h-step central differences.  Curve
    derivatives come from second-order differences of the sampled arrays,
    so t must be uniformly spaced.  The normal is the leftward rotation
    of the velocity, matching positive curvature for curves bending
    toward smaller x when th increases.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    th = np.asarray(th, dtype=float)
    if t.size < 5:
        raise PreconditionError("geodesic curvature needs at least 5 samples")
    dt = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - dt)) > 1e-9 * abs(dt):
        raise PreconditionError("geodesic curvature needs a uniform parameter grid")
    xp = np.gradient(x, dt, edge_order=2)
    thp = np.gradient(th, dt, edge_order=2)
    xpp = np.gradient(xp, dt, edge_order=2)
    thpp = np.gradient(thp, dt, edge_order=2)
    return _curvature_from_state(E, G, x, xp, xpp, thp, thpp, h)


def _curvature_from_state(E, G, x, xp, xpp, thp, thpp, h):
    x = np.asarray(x, dtype=float)
    Ev = np.array([E(v) for v in x])
    Gv = np.array([G(v) for v in x])
    Ex = np.array([(E(v + h) - E(v - h)) / (2.0 * h) for v in x])
    Gx = np.array([(G(v + h) - G(v - h)) / (2.0 * h) for v in x])
    if np.any(Ev <= 0.0) or np.any(Gv <= 0.0):
        raise PreconditionError("metric coefficients must be positive on the curve")
    # Christoffel symbols of a diagonal metric depending on x only
    a1 = xpp + Ex / (2.0 * Ev) * xp * xp - Gx / (2.0 * Ev) * thp * thp
    a2 = thpp + Gx / Gv * xp * thp
    s2 = Ev * xp * xp + Gv * thp * thp
    if np.any(s2 <= 0.0):
        raise PreconditionError("curve has a stationary point")
    w1, w2 = -Gv * thp, Ev * xp
    num = Ev * a1 * w1 + Gv * a2 * w2
    return num / (np.sqrt(s2) ** 3 * np.sqrt(Ev * Gv))


def quotient_curvature(
    profile: MetricProfile,
    trajectory: Trajectory,
    h: float = 1e-4,
    x_cap: float | None = None,
):
    """theta -> geodesic curvature of the solution curve in the
    Hsiang-Lawson metric.

    Curve derivatives use the trajectory's uniform grid: x' from central
    differences of x, x'' from central differences of the stored slope
    (avoiding noisy double differences).  A step-halving consistency
    check on the metric-derivative step raises StepError on more than
    10 percent disagreement.  x_cap restricts escaping runs to moderate
    radii, where the volume-weighted curvature retains relative accuracy.
    """
    theta, x, xp = trajectory.theta, trajectory.x, trajectory.xp
    if theta.size < 9:
        raise PreconditionError("quotient curvature needs a finer trajectory grid")
    dt = theta[1] - theta[0]
    bad = np.nonzero(np.abs(np.diff(theta) - dt) > 1e-9 * dt)[0]
    if bad.size:
        # escape-terminated runs append the event state; use the uniform part
        end = int(bad[0]) + 1
        if end < 9:
            raise PreconditionError("quotient curvature needs a uniform theta grid")
        theta, x, xp = theta[:end], x[:end], xp[:end]
    if x_cap is not None:
        above = np.nonzero(x > x_cap)[0]
        if above.size:
            end = int(above[0])
            if end < 9:
                raise PreconditionError("radius cap leaves too few samples")
            theta, x, xp = theta[:end], x[:end], xp[:end]
    xp_fd = np.gradient(x, dt, edge_order=2)
    xpp_fd = np.gradient(xp, dt, edge_order=2)
    ones = np.ones_like(x)
    zeros = np.zeros_like(x)

    def k_at(step):
        return _curvature_from_state(
            profile.h_xx, profile.h_tt, x, xp_fd, xpp_fd, ones, zeros, step
        )

    k = k_at(h)
    k_half = k_at(0.5 * h)
    scale = max(float(np.max(np.abs(k_half))), 1e-12)
    if float(np.max(np.abs(k - k_half))) > 0.1 * scale:
        raise StepError("metric-derivative step too large: halving changes k > 10%")
    # trim the one-sided-difference ends
    lo, hi = 2, theta.size - 2
    grid, vals = theta[lo:hi], k_half[lo:hi]

    def k_of_theta(t):
        return float(np.interp(t, grid, vals))

    k_of_theta.theta = grid
    k_of_theta.values = vals
    return k_of_theta


def quotient_residual(
    profile: MetricProfile,
    trajectory: Trajectory,
    h: float = 1e-4,
    x_cap: float | None = None,
):
    """(max |V^2 k - K|, stdev(V^2 k)) along the trajectory."""
    k = quotient_curvature(profile, trajectory, h, x_cap=x_cap)
    v2 = np.array([profile.volume(x) ** 2 for x in
                   np.interp(k.theta, trajectory.theta, trajectory.x)])
    v2k = v2 * k.values
    K = trajectory.problem.K
    return float(np.max(np.abs(v2k - K))), float(np.std(v2k))


def codifferential_check(
    profile: MetricProfile,
    trajectory: Trajectory,
    h: float = 1e-4,
    stride: int = 20,
    x_cap: float | None = None,
) -> float:
    """max |codifferential of the rescaled mean-curvature one-form|.

    Along a one-dimensional quotient curve the codifferential reduces to
    the arclength derivative of V^2 k; it vanishes exactly when V^2 k is
    constant, which is the quotient equation itself.  Differences are
    taken on a coarsened grid (stride samples) because the quantity is a
    third derivative of the curve.
    """
    k = quotient_curvature(profile, trajectory, h, x_cap=x_cap)
    theta = k.theta[::stride]
    if theta.size < 5:
        raise PreconditionError("codifferential check needs a longer trajectory")
    x = np.interp(theta, trajectory.theta, trajectory.x)
    xp = np.interp(theta, trajectory.theta, trajectory.xp)
    v2k = np.array([profile.volume(v) ** 2 for v in x]) * k.values[::stride]
    dt = theta[1] - theta[0]
    dv2k = np.gradient(v2k, dt, edge_order=2)
    speed = np.sqrt(
        np.array([profile.h_xx(v) for v in x]) * xp * xp
        + np.array([profile.h_tt(v) for v in x])
    )
    vals = np.abs(dv2k / speed)
    return float(np.max(vals[1:-1]))


# -- flat-ambient immersion checks --------------------------------------

def _as_real(z: np.ndarray) -> np.ndarray:
    return np.concatenate([np.asarray(z).real, np.asarray(z).imag])


def _first_derivs(f, u, h):
    u = np.asarray(u, dtype=float)
    out = []
    for a in range(u.size):
        e = np.zeros_like(u)
        e[a] = h
        out.append((np.asarray(f(u + e)) - np.asarray(f(u - e))) / (2.0 * h))
    return np.array(out)


def _second_derivs(f, u, h):
    u = np.asarray(u, dtype=float)
    k = u.size
    f0 = np.asarray(f(u))
    out = np.empty((k, k) + f0.shape, dtype=complex)
    for a in range(k):
        ea = np.zeros_like(u)
        ea[a] = h
        out[a, a] = (np.asarray(f(u + ea)) - 2.0 * f0 + np.asarray(f(u - ea))) / (h * h)
        for b in range(a + 1, k):
            eb = np.zeros_like(u)
            eb[b] = h
            mixed = (
                np.asarray(f(u + ea + eb))
                - np.asarray(f(u + ea - eb))
                - np.asarray(f(u - ea + eb))
                + np.asarray(f(u - ea - eb))
            ) / (4.0 * h * h)
            out[a, b] = mixed
            out[b, a] = mixed
    return out


def _mean_curvature_once(f, u, h):
    d1 = _first_derivs(f, u, h)
    d2 = _second_derivs(f, u, h)
    k = d1.shape[0]
    g = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            g[a, b] = np.vdot(d1[a], d1[b]).real
    det = np.linalg.det(g)
    if det <= _RANK_TOL * max(1.0, float(np.max(np.abs(g))) ** k):
        raise DegenerateParamError("first fundamental form is rank deficient")
    ginv = np.linalg.inv(g)
    H = np.zeros(d1.shape[1], dtype=complex)
    for a in range(k):
        for b in range(k):
            dd = d2[a, b]
            # tangential projection removed with real inner products
            coef = np.array([np.vdot(dd, d1[c]).real for c in range(k)])
            tang = np.zeros_like(dd)
            for c in range(k):
                tang += float(ginv[c] @ coef) * d1[c]
            H += ginv[a, b] * (dd - tang)
    return H


def mean_curvature_fd(f, u0, h: float = 1e-4, with_error: bool = False):
    """Mean curvature vector of the immersion f at parameters u0.

    Central differences at steps h and h/2 with Richardson combination;
    the step-halving difference is the error estimate.
    """
    H1 = _mean_curvature_once(f, u0, h)
    H2 = _mean_curvature_once(f, u0, 0.5 * h)
    H = (4.0 * H2 - H1) / 3.0
    err = float(np.max(np.abs(H2 - H1)))
    if with_error:
        return H, err
    return H


def _tangent_lagrangian_defect(d1) -> float:
    worst = 0.0
    k = d1.shape[0]
    for a in range(k):
        for b in range(a + 1, k):
            worst = max(worst, abs(np.vdot(d1[a], d1[b]).imag))
    return worst


def delta_alpha_H_fd(f, grid, h: float = 1e-3) -> float:
    """max |codifferential of alpha_H| over interior parameter points.

    alpha_H(e_a) = omega(H, e_a) is built pointwise from the
    finite-difference mean curvature; its codifferential uses the induced
    metric and finite-difference Christoffel symbols.  Rejects immersions
    whose tangent frames fail the Lagrangian condition, since alpha_H is
    only the right object on Lagrangian submanifolds.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    # the guard needs a small step of its own: its defect is O(step^2)
    d1 = _first_derivs(f, grid[0], min(h, 1e-4))
    scale = float(np.max(np.abs(d1))) ** 2
    if _tangent_lagrangian_defect(d1) > _LAGRANGIAN_GUARD * max(scale, 1.0):
        raise PreconditionError("immersion is not Lagrangian; alpha_H check refused")

    def alpha_and_metric(u):
        d = _first_derivs(f, u, h)
        H = mean_curvature_fd(f, u, h)
        k = d.shape[0]
        g = np.empty((k, k))
        alpha = np.empty(k)
        for a in range(k):
            alpha[a] = np.vdot(H, d[a]).imag  # omega(H, e_a) in flat space
            for b in range(k):
                g[a, b] = np.vdot(d[a], d[b]).real
        return alpha, g

    worst = 0.0
    for u in grid:
        u = np.asarray(u, dtype=float)
        k = u.size
        alpha0, g0 = alpha_and_metric(u)
        dalpha = np.empty((k, k))  # dalpha[a, b] = d_a alpha_b
        dg = np.empty((k, k, k))   # dg[a, b, c] = d_a g_bc
        for a in range(k):
            e = np.zeros_like(u)
            e[a] = h
            ap, gp = alpha_and_metric(u + e)
            am, gm = alpha_and_metric(u - e)
            dalpha[a] = (ap - am) / (2.0 * h)
            dg[a] = (gp - gm) / (2.0 * h)
        ginv = np.linalg.inv(g0)
        gamma = np.empty((k, k, k))  # gamma[c, a, b]
        for c in range(k):
            for a in range(k):
                for b in range(k):
                    gamma[c, a, b] = 0.5 * float(
                        ginv[c] @ (dg[a, b, :] + dg[b, a, :] - dg[:, a, b])
                    )
        val = 0.0
        for a in range(k):
            for b in range(k):
                cov = dalpha[a, b] - float(gamma[:, a, b] @ alpha0)
                val += ginv[a, b] * cov
        worst = max(worst, abs(-val))
    return worst


# -- reports ------------------------------------------------------------

@dataclass
class VerificationReport:
    """Residuals, tolerances and the pass flags they imply."""

    residuals: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def record(self, name: str, value: float, tolerance: float) -> bool:
        self.residuals[name] = float(value)
        self.tolerances[name] = float(tolerance)
        return value <= tolerance

    @property
    def passed(self) -> dict:
        # pass flags are pure comparisons, never overridden
        return {k: self.residuals[k] <= self.tolerances[k] for k in self.residuals}

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def to_json(self) -> str:
        doc = {
            "residuals": {k: format(v, ".17g") for k, v in self.residuals.items()},
            "tolerances": {k: format(v, ".17g") for k, v in self.tolerances.items()},
            "passed": self.passed,
            "all_passed": self.all_passed,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def verify_trajectory(
    trajectory: Trajectory,
    cloud: ImmersionCloud | None = None,
    omega_tol: float = 1e-9,
    quotient_tol_factor: float = 1e-4,
    codifferential_tol: float = 1e-3,
    drift_tol_factor: float = 1e-8,
) -> VerificationReport:
    """Standard report for a solved curve and (optionally) its sweep."""
    problem = trajectory.problem
    report = VerificationReport()
    report.record(
        "first_integral_drift",
        trajectory.drift_max,
        drift_tol_factor * (1.0 + abs(trajectory.lam)),
    )
    if trajectory.classification.kind != "constant":
        cap = None
        if not np.isfinite(problem.profile.x_max):
            cap = 10.0 * max(abs(trajectory.x[0]), 1.0)
        _, stdev = quotient_residual(problem.profile, trajectory, x_cap=cap)
        report.record("quotient_stdev", stdev, quotient_tol_factor * abs(problem.K))
        report.record(
            "codifferential_residual",
            codifferential_check(problem.profile, trajectory, x_cap=cap),
            codifferential_tol,
        )
    if cloud is not None:
        report.record("max_omega", lagrangian_residual(cloud), omega_tol)
    return report
