import math

import numpy as np
import pytest

from hmlag.ambient import ActionCase
from hmlag.errors import (
    DomainError,
    NumericalDomainError,
    PreconditionError,
    SingularSlopeError,
    StateError,
    TurningRegionError,
)
from hmlag.reduced_ode import (
    Admissibility,
    InitialCondition,
    ReducedProblem,
    constant_solutions,
    el_acceleration,
    first_integral,
    forbidden_lambda,
    hamiltonian_from_momentum,
    lagrangian_density,
    lambda_from_ic,
    legendre_momentum,
    legendre_velocity,
    radial_slope,
    slope_radicand,
)


def projective_rotation_acceleration(n, K, phi, phip):
    """Independent closed form for the projective rotation case.

    Transcribed second-order equation solved for phi'': with
    S = sqrt(sin^2 cos^2 + phi'^2),
    phi'' sin cos = [(n+1)cos^2 - 2 sin^2] phi'^2
                    + sin^2 cos^2 [n cos^2 - sin^2] - K S^3 / sin^(n-1).
    """
    s, c = math.sin(phi), math.cos(phi)
    S = math.sqrt(s * s * c * c + phip * phip)
    num = ((n + 1) * c * c - 2 * s * s) * phip * phip \
        + s * s * c * c * (n * c * c - s * s) - K * S**3 / s ** (n - 1)
    return num / (s * c)


def flat_rotation_acceleration(n, K, r, rp):
    """Independent closed form for the flat rotation case: with
    S = sqrt(r^2 + rdot^2),
    r rddot = 2 rdot^2 + r^2 + n S^2 - (K / r^n) S^3."""
    S = math.sqrt(r * r + rp * rp)
    return (2 * rp * rp + r * r + n * S * S - (K / r**n) * S**3) / r


def test_el_acceleration_matches_transcribed_equations():
    for n in (2, 3):
        p = ReducedProblem(ActionCase("cpn_so", n), 0.4)
        for phi, phip in ((0.5, 0.0), (0.8, 0.3), (1.2, -0.7)):
            assert el_acceleration(p, phi, phip) == pytest.approx(
                projective_rotation_acceleration(n, 0.4, phi, phip), rel=1e-12
            )
        q = ReducedProblem(ActionCase("cn_so", n), 1.5)
        for r, rp in ((0.8, 0.0), (1.3, 0.5), (2.0, -1.1)):
            assert el_acceleration(q, r, rp) == pytest.approx(
                flat_rotation_acceleration(n, 1.5, r, rp), rel=1e-12
            )


def test_el_acceleration_is_the_variational_equation():
    # discrete variation of the action functional vanishes along the
    # acceleration field: dL/dx - d/dtheta(dL/dx') = 0
    h = 1e-6
    for case, K, x, xp in (
        (ActionCase("cpn_torus", 2, (0.4,)), 0.3, 0.7, 0.25),
        (ActionCase("cn_torus", 2, (0.3, -0.2)), 1.0, 1.3, -0.4),
        (ActionCase("cpn_so", 3), -0.2, 0.9, 0.1),
    ):
        p = ReducedProblem(case, K)
        xpp = el_acceleration(p, x, xp)
        dL_dx = (lagrangian_density(p, x + h, xp) - lagrangian_density(p, x - h, xp)) / (2 * h)
        # d/dtheta p(x(theta), x'(theta)) by chain rule with FD coefficients
        dp_dx = (legendre_momentum(p, x + h, xp) - legendre_momentum(p, x - h, xp)) / (2 * h)
        dp_dxp = (legendre_momentum(p, x, xp + h) - legendre_momentum(p, x, xp - h)) / (2 * h)
        residual = dL_dx - (dp_dx * xp + dp_dxp * xpp)
        assert abs(residual) < 1e-7


def test_legendre_round_trip():
    p = ReducedProblem(ActionCase("cpn_so", 2), 0.1)
    for x, xp in ((0.4, 0.0), (0.9, 0.6), (1.2, -1.7)):
        mom = legendre_momentum(p, x, xp)
        assert legendre_velocity(p, x, mom) == pytest.approx(xp, rel=1e-12, abs=1e-13)
    with pytest.raises(NumericalDomainError):
        legendre_velocity(p, 0.9, 10.0)  # momentum bound |p| < sqrt(A)


def test_hamiltonian_identity_and_frozen_values():
    # H evaluated at the initial condition equals -lambda by construction
    configs = (
        (ActionCase("cn_so", 2), 2.0, 1.0, 0.0, 0.0),
        (ActionCase("cn_so", 2), 1.0, 1.0, 0.0, 0.5),
        (ActionCase("cpn_so", 2), 1.0, math.pi / 4, 0.0, 0.10355339059327379),
    )
    for case, K, a, b, lam_expected in configs:
        p = ReducedProblem(case, K)
        lam = lambda_from_ic(p, InitialCondition(a, b))
        assert lam == pytest.approx(lam_expected, abs=1e-15)
        assert first_integral(p, a, b) == pytest.approx(-lam, abs=1e-15)
        mom = legendre_momentum(p, a, b)
        assert hamiltonian_from_momentum(p, a, mom) == pytest.approx(-lam, abs=1e-13)


def test_hamiltonian_constant_along_integration():
    from hmlag.solver import integrate

    p = ReducedProblem(ActionCase("cpn_so", 2), 0.05)
    traj = integrate(p, InitialCondition(0.6, 0.2), 10.0)
    H = np.array([first_integral(p, x, xp) for x, xp in zip(traj.x, traj.xp)])
    assert np.max(np.abs(H + traj.lam)) < 1e-9


def test_lambda_requires_state():
    p = ReducedProblem(ActionCase("cpn_so", 2), 0.1)
    with pytest.raises(StateError):
        p.require_lambda()
    with pytest.raises(StateError):
        slope_radicand(p, 0.5)


def test_forbidden_lambda_projective():
    p = ReducedProblem(ActionCase("cpn_so", 2), 0.05)
    # lambda inside the closed barrier interval [-K/2, 0]
    for lam, ok in ((-0.01, False), (0.0, False), (-0.025, False), (0.3, True), (-0.3, True)):
        p.lam = lam
        adm = forbidden_lambda(p)
        assert isinstance(adm, Admissibility)
        assert adm.admissible is ok
        if not ok:
            assert adm.reason


def test_forbidden_lambda_flat():
    p = ReducedProblem(ActionCase("cn_so", 2), 2.0)
    p.lam = 0.0
    assert not forbidden_lambda(p).admissible
    p.lam = 0.7
    assert forbidden_lambda(p).admissible
    q = ReducedProblem(ActionCase("cn_torus", 2, (0.3, -0.2)), 2.0)
    q.lam = -0.3  # equals -(K/2) c_1
    assert not forbidden_lambda(q).admissible
    q.lam = 0.2  # equals -(K/2) c_2
    assert not forbidden_lambda(q).admissible
    q.lam = 0.5
    assert forbidden_lambda(q).admissible


def test_zero_K_rejected():
    with pytest.raises(PreconditionError):
        ReducedProblem(ActionCase("cpn_so", 2), 0.0)


def test_slope_recovers_integrated_velocity():
    from hmlag.solver import integrate

    p = ReducedProblem(ActionCase("cpn_so", 2), 0.05)
    traj = integrate(p, InitialCondition(0.6, 0.0), 2.0)
    i = len(traj) // 3
    x, xp = traj.x[i], traj.xp[i]
    branch = 1 if xp >= 0 else -1
    assert radial_slope(p, x, branch) == pytest.approx(xp, abs=1e-8)


def test_slope_errors():
    p = ReducedProblem(ActionCase("cpn_so", 2), 0.05)
    lambda_from_ic(p, InitialCondition(0.6, 0.0))
    with pytest.raises(TurningRegionError):
        radial_slope(p, 1.5)  # beyond the upper turning point
    q = ReducedProblem(ActionCase("cn_so", 2), 2.0)
    q.lam = -0.5
    # lambda + (K/2) r^2 = 0 at r^2 = 0.5
    with pytest.raises(SingularSlopeError):
        radial_slope(q, math.sqrt(0.5))


def test_turning_point_acceleration_from_radicand():
    # at a turning start, x'' = f'(a) / (2 A(a))
    p = ReducedProblem(ActionCase("cpn_so", 2), 0.05)
    a = 0.6
    lambda_from_ic(p, InitialCondition(a, 0.0))
    h = 1e-6
    fprime = (slope_radicand(p, a + h) - slope_radicand(p, a - h)) / (2 * h)
    assert el_acceleration(p, a, 0.0) == pytest.approx(
        fprime / (2 * p.A(a)), rel=1e-6
    )


def test_constant_solutions_closed_form():
    assert constant_solutions(ReducedProblem(ActionCase("cn_so", 2), 3.0)) == [1.0]
    assert constant_solutions(
        ReducedProblem(ActionCase("cn_so", 3), 8.0)
    ) == pytest.approx([math.sqrt(2.0)])
    assert constant_solutions(ReducedProblem(ActionCase("cn_so", 2), -1.0)) == []


def test_constant_solutions_are_equilibria():
    for case, K in (
        (ActionCase("cpn_so", 2), 0.4),
        (ActionCase("cpn_torus", 2, (0.4,)), 0.3),
        (ActionCase("cn_torus", 2, (0.3, -0.2)), 3.0),
    ):
        p = ReducedProblem(case, K)
        roots = constant_solutions(p)
        assert roots, f"no constant solution found for {case.variant}"
        for r in roots:
            assert abs(el_acceleration(p, r, 0.0)) < 1e-9


def test_flat_torus_start_barrier():
    p = ReducedProblem(ActionCase("cn_torus", 2, (0.3, -0.25)), 1.0)
    with pytest.raises((PreconditionError, DomainError)):
        lambda_from_ic(p, InitialCondition(0.3, 0.0))  # below sqrt(sigma)
