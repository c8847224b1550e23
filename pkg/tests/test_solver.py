import math

import numpy as np
import pytest

from hmlag.ambient import ActionCase
from hmlag.errors import (
    BracketError,
    DegenerateTurningPoint,
    PreconditionError,
)
from hmlag.reduced_ode import (
    InitialCondition,
    ReducedProblem,
    lambda_from_ic,
)
from hmlag.solver import (
    best_rational,
    closed_search,
    closure_residual,
    extend_by_reflection,
    integrate,
    period_omega,
    shooting_period,
    theta_max,
    turning_radius,
)


def problem(case="cpn_so", n=2, c=(), K=0.05):
    return ReducedProblem(ActionCase(case, n, tuple(c)), K)


def test_integration_conserves_first_integral():
    p = problem()
    traj = integrate(p, InitialCondition(0.6, 0.0), 20.0)
    assert traj.classification.kind == "complete"
    assert traj.drift_max < 1e-8 * (1 + abs(traj.lam))
    assert traj.theta[0] == 0.0 and traj.theta[-1] == pytest.approx(20.0)


def test_tightening_tolerance_shrinks_drift():
    p1, p2 = problem(), problem()
    loose = integrate(p1, InitialCondition(0.6, 0.0), 10.0, tol=1e-6)
    tight = integrate(p2, InitialCondition(0.6, 0.0), 10.0, tol=1e-10)
    assert tight.drift_max < loose.drift_max


def test_constant_classification():
    p = problem("cn_so", 2, (), 3.0)
    traj = integrate(p, InitialCondition(1.0, 0.0), 5.0)
    assert traj.classification.kind == "constant"
    assert np.max(np.abs(traj.x - 1.0)) < 1e-12


def test_blowup_classification_and_escape_event():
    p = problem("cn_so", 2, (), 2.0)
    traj = integrate(p, InitialCondition(1.5, 0.0), 10.0)
    assert traj.classification.kind == "blowup"
    assert traj.classification.theta_max is not None
    assert traj.x[-1] == pytest.approx(1500.0, rel=1e-6)  # default cap 1e3 a


def test_forbidden_start_rejected():
    p = problem("cn_so", 2, (), 2.0)
    with pytest.raises(PreconditionError):
        integrate(p, InitialCondition(1.0, 0.0), 5.0)  # lambda = 0


def test_turning_radius_brackets_oscillation():
    p = problem()
    a = 0.6
    lambda_from_ic(p, InitialCondition(a, 0.0))
    b = turning_radius(p, a)
    assert b > a
    traj = integrate(p, InitialCondition(a, 0.0), 20.0)
    assert np.max(traj.x) == pytest.approx(b, abs=1e-6)
    assert np.min(traj.x) == pytest.approx(a, abs=1e-6)


def test_turning_radius_requires_turning_start():
    p = problem()
    lambda_from_ic(p, InitialCondition(0.6, 0.3))
    with pytest.raises(PreconditionError):
        turning_radius(p, 0.6)


def test_period_quadrature_matches_shooting():
    for n, K in ((2, 0.05), (2, -0.05), (3, 0.05)):
        for a in (0.5, 0.8, 1.1):
            p = problem(n=n, K=K)
            lam = lambda_from_ic(p, InitialCondition(a, 0.0))
            from hmlag.reduced_ode import forbidden_lambda

            if not forbidden_lambda(p).admissible:
                continue
            omega = period_omega(p, a)
            assert omega == pytest.approx(
                shooting_period(problem(n=n, K=K), a), abs=1e-8
            )


def test_period_near_degenerate_start_stays_finite():
    # a hair away from the constant solution the turning interval is tiny
    # but the half-period limit is regular
    p = problem()
    a = 0.9437185929648241
    lambda_from_ic(p, InitialCondition(a, 0.0))
    omega = period_omega(p, a)
    assert omega == pytest.approx(shooting_period(problem(), a), abs=1e-6)


def test_period_rejects_constant_start():
    from hmlag.reduced_ode import constant_solutions

    p = problem("cn_so", 2, (), 3.0)
    lambda_from_ic(p, InitialCondition(1.0, 0.0))
    with pytest.raises(DegenerateTurningPoint):
        period_omega(p, 1.0)


def test_projective_torus_period_is_pi():
    # the normalized projective torus functional is the n = 1 rotation
    # case; its half-period is pi for every admissible turning start
    for a in (0.4, 0.7, 1.0):
        p = problem("cpn_torus", 2, (0.4,), 0.05)
        lambda_from_ic(p, InitialCondition(a, 0.0))
        assert period_omega(p, a) == pytest.approx(math.pi, abs=1e-9)


def test_theta_max_matches_far_field_angle():
    p = problem("cn_so", 2, (), 2.0)
    a = 1.5
    lambda_from_ic(p, InitialCondition(a, 0.0))
    tm = theta_max(p, a)
    traj = integrate(problem("cn_so", 2, (), 2.0), InitialCondition(a, 0.0), 10.0)
    assert traj.classification.kind == "blowup"
    assert abs(tm - traj.theta[-1]) < 1e-3


def test_theta_max_preconditions():
    p = problem()
    lambda_from_ic(p, InitialCondition(0.6, 0.0))
    with pytest.raises(PreconditionError):
        theta_max(p, 0.6)  # projective case has no escape


def test_reflection_extension_is_even():
    p = problem()
    traj = integrate(p, InitialCondition(0.6, 0.0), 5.0)
    ext = extend_by_reflection(traj)
    assert ext.theta[0] == pytest.approx(-5.0)
    mid = len(ext) // 2
    assert np.allclose(ext.x[: mid + 1], ext.x[mid:][::-1])
    assert np.allclose(ext.xp[: mid + 1], -ext.xp[mid:][::-1])


def test_best_rational():
    assert best_rational(0.5, 64) == (1, 2)
    assert best_rational(6 / 7 + 1e-12, 64) == (6, 7)
    assert best_rational(math.pi / 4, 10) == (7, 9)


def test_closure_residual_of_closed_solution():
    # refined closed start found by the period scan
    a, p_num, q_den = 0.69015976032509163, 6, 7
    residual = closure_residual(problem(), a, p_num, q_den)
    assert residual < 1e-6


def test_closed_search_finds_rational_periods():
    hits = closed_search(problem, np.linspace(0.55, 0.75, 21), q_max=8)
    assert hits
    a, p_num, q_den = hits[0]
    assert q_den <= 8
    pp = problem()
    lambda_from_ic(pp, InitialCondition(a, 0.0))
    assert period_omega(pp, a) / math.pi == pytest.approx(p_num / q_den, abs=1e-9)


def test_closed_search_requires_admissible_grid():
    with pytest.raises(PreconditionError):
        # the whole grid is below the flat torus barrier
        closed_search(
            lambda: problem("cn_torus", 2, (0.3, -0.25), 1.0),
            np.linspace(0.1, 0.3, 5),
        )
