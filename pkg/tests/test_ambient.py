import math

import numpy as np
import pytest

from hmlag.ambient import (
    ActionCase,
    AmbientPoint,
    hermitian,
    hopf_lift_frame,
    hopf_project,
    hopf_vertical,
    horizontal_project,
    is_horizontal,
    kaehler_form,
    moment_map,
)
from hmlag.errors import InvalidInput
from hmlag.reduction import orbit_param


def test_ambient_point_validation():
    AmbientPoint(np.array([1.0 + 0j, 2.0]), "flat")
    AmbientPoint(np.array([1.0 + 0j, 0.0]), "projective")
    with pytest.raises(InvalidInput):
        AmbientPoint(np.array([1.0 + 0j, 2.0]), "projective")  # not unit norm
    with pytest.raises(InvalidInput):
        AmbientPoint(np.array([]), "flat")
    with pytest.raises(InvalidInput):
        AmbientPoint(np.array([1.0 + 0j]), "nowhere")


def test_action_case_validation():
    ActionCase("cpn_so", 2)
    ActionCase("cpn_torus", 3, (0.2, 0.3))
    ActionCase("cn_torus", 2, (0.5, -0.1))
    with pytest.raises(InvalidInput):
        ActionCase("cpn_torus", 3, (0.2,))  # needs n-1 constants
    with pytest.raises(InvalidInput):
        ActionCase("cpn_torus", 2, (1.5,))  # sum(c) >= 1
    with pytest.raises(InvalidInput):
        ActionCase("cn_torus", 2, (0.5, 0.0))  # zero level constant
    with pytest.raises(InvalidInput):
        ActionCase("cpn_so", 2, (0.1,))  # rotation cases carry no levels
    with pytest.raises(InvalidInput):
        ActionCase("cpn_so", 0)


def test_case_derived_quantities():
    case = ActionCase("cpn_torus", 3, (0.2, 0.3))
    assert case.delta == pytest.approx(0.5)
    assert case.ambient_dim == 4
    assert case.is_projective
    flat = ActionCase("cn_torus", 2, (0.5, -0.1))
    assert flat.sigma == pytest.approx(0.1)
    assert not flat.is_projective
    assert ActionCase("cn_torus", 2, (0.5, 0.1)).sigma == 0.0


def test_moment_map_vanishes_on_rotation_orbits():
    # rotation-case orbits sit in the zero level of the moment map, and
    # the level is preserved by the group action
    rng = np.random.default_rng(7)
    for case in (ActionCase("cpn_so", 3), ActionCase("cn_so", 2)):
        p = orbit_param(case, 0.7, 1.1)
        mu = moment_map(case, p)
        d = case.n if case.variant == "cpn_so" else case.n + 1
        assert mu.shape[0] == d * (d - 1) // 2
        assert np.max(np.abs(mu)) < 1e-14
        # a random rotation of the real block keeps the level
        d = case.n if case.variant == "cpn_so" else case.n + 1
        q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        z = p.coords.copy()
        if case.variant == "cpn_so":
            z[1:] = q @ z[1:]
        else:
            z = q @ z
        rotated = AmbientPoint(z, p.space)
        assert np.max(np.abs(moment_map(case, rotated))) < 1e-14


def test_moment_map_levels_on_torus_orbits():
    case = ActionCase("cpn_torus", 3, (0.2, 0.3))
    p = orbit_param(case, 0.5, 0.9)
    assert moment_map(case, p) == pytest.approx([0.2, 0.3])
    flat = ActionCase("cn_torus", 2, (0.5, -0.1))
    q = orbit_param(flat, 1.2, 0.3)
    assert moment_map(flat, q) == pytest.approx([0.5, -0.1])
    # torus phases do not move the level
    z = q.coords * np.exp(1j * np.array([0.4, 1.3, -1.7]))
    assert moment_map(flat, AmbientPoint(z)) == pytest.approx([0.5, -0.1])


def test_kaehler_form_flat():
    p = AmbientPoint(np.array([0.0 + 0j, 0.0]))
    u = np.array([1.0 + 0j, 0.0])
    assert kaehler_form(p, u, 1j * u) == pytest.approx(1.0)  # omega(u, iu) = |u|^2
    assert kaehler_form(p, u, u) == 0.0
    v = np.array([0.0, 1.0 + 0j])
    assert kaehler_form(p, u, v) == 0.0


def test_kaehler_form_requires_horizontal_on_projective():
    z = np.array([1.0 + 0j, 0.0])
    p = AmbientPoint(z, "projective")
    v = np.array([0.0, 1.0 + 0j])
    assert kaehler_form(p, v, 1j * v) == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        kaehler_form(p, z, v)  # z itself is vertical-adjacent, not horizontal


def test_horizontal_projection():
    rng = np.random.default_rng(3)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    z /= np.linalg.norm(z)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    h = horizontal_project(z, u)
    assert is_horizontal(z, h)
    assert abs(hermitian(z, h)) < 1e-14
    # projection is idempotent
    assert np.allclose(horizontal_project(z, h), h)


def test_hopf_structure():
    z = np.array([0.6, 0.8j], dtype=complex)
    p = hopf_project(z)
    v = hopf_vertical(z)
    assert np.allclose(v, 1j * z)
    u = horizontal_project(z, np.array([1.0 + 0j, 0.3]))
    frame = hopf_lift_frame(p, u[None, :])
    assert frame.shape == (2, 2)
    assert np.allclose(frame[-1], 1j * z)
    with pytest.raises(InvalidInput):
        hopf_lift_frame(p, z[None, :])  # not horizontal
