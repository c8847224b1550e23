import math

import numpy as np
import pytest

from hmlag.ambient import ActionCase
from hmlag.errors import DomainError
from hmlag.reduction import (
    det_phi,
    hsiang_lawson_metric,
    hsiang_lawson_phi_form,
    induced_metric,
    make_profile,
    orbit_param,
    orbit_volume,
)

CASES = (
    ActionCase("cpn_so", 2),
    ActionCase("cpn_so", 3),
    ActionCase("cpn_torus", 2, (0.4,)),
    ActionCase("cpn_torus", 3, (0.2, 0.3)),
    ActionCase("cn_so", 2),
    ActionCase("cn_so", 3),
    ActionCase("cn_torus", 2, (0.3, -0.2)),
    ActionCase("cn_torus", 3, (0.5, 0.2, -0.1)),
)


def test_det_phi_matches_dense_determinant():
    rng = np.random.default_rng(11)
    for n in range(1, 7):
        for _ in range(5):
            c = rng.uniform(-0.2, 1.0, n)
            r = rng.uniform(math.sqrt(max(0.0, -c.min())) + 0.2, 2.0)
            phi = np.full((n, n), r * r)
            phi[np.diag_indices(n)] = 2 * r * r + c
            assert det_phi(n, c, r) == pytest.approx(
                np.linalg.det(phi), rel=1e-12
            )


def test_det_phi_rejects_bad_input():
    with pytest.raises(DomainError):
        det_phi(2, [0.1], 1.0)
    with pytest.raises(DomainError):
        det_phi(1, [-1.0], 0.5)  # r^2 + c <= 0


def test_profile_domains_and_collar():
    prof = make_profile(ActionCase("cpn_so", 2))
    assert prof.contains(0.5)
    assert not prof.contains(0.0)
    assert not prof.contains(math.pi / 2)
    with pytest.raises(DomainError):
        prof.check(prof.x_min + 0.5 * prof.collar)
    with pytest.raises(DomainError):
        prof.check(float("nan"))
    torus = make_profile(ActionCase("cn_torus", 2, (0.3, -0.25)))
    assert torus.x_min == pytest.approx(0.5)
    assert not torus.contains(0.4)
    assert torus.contains(0.9)


def test_metric_derivatives_match_finite_differences():
    h = 1e-6
    for case in CASES:
        prof = make_profile(case)
        for x in prof.sample(7, pad=0.1):
            for f, df in ((prof.h_xx, prof.dh_xx), (prof.h_tt, prof.dh_tt)):
                fd = (f(x + h) - f(x - h)) / (2 * h)
                assert df(x) == pytest.approx(fd, rel=1e-8, abs=1e-9)


def test_hsiang_lawson_equals_volume_squared_times_induced():
    for case in CASES:
        prof = make_profile(case)
        for x in prof.sample(5, pad=0.2):
            r = prof.r_of_x(x)
            g_rr, g_tt = induced_metric(case, r)
            hl_rr, hl_tt = hsiang_lawson_metric(case, r)
            v2 = orbit_volume(case, r) ** 2
            assert hl_rr == pytest.approx(v2 * g_rr, rel=1e-12)
            assert hl_tt == pytest.approx(v2 * g_tt, rel=1e-12)


def test_canonical_coordinate_is_the_metric_radius():
    # in the canonical coordinate, h_tt equals the squared Hsiang-Lawson
    # angular radius and h_xx the squared radial stretch; consistency with
    # the r-coordinate form under the change of variables
    for case in CASES:
        prof = make_profile(case)
        for x in prof.sample(5, pad=0.2):
            r = prof.r_of_x(x)
            hl_rr, hl_tt = hsiang_lawson_metric(case, r)
            h = 1e-7
            drdx = (prof.r_of_x(x + h) - prof.r_of_x(x - h)) / (2 * h)
            assert prof.h_xx(x) == pytest.approx(hl_rr * drdx**2, rel=1e-6)
            assert prof.h_tt(x) == pytest.approx(hl_tt, rel=1e-12)


def test_flat_torus_flattening_radius():
    # R = sqrt(r^2 P) rectifies the radial coefficient: h_rr = (dR/dr)^2
    # exactly, so (R, theta) are polar coordinates with angular factor R^2
    case = ActionCase("cn_torus", 2, (0.3, -0.2))
    prof = make_profile(case)
    h = 1e-6
    for r in (0.7, 1.0, 1.6, 2.5):
        R = lambda s: math.sqrt(prof.h_tt(s))
        dR = (R(r + h) - R(r - h)) / (2 * h)
        assert prof.h_xx(r) == pytest.approx(dR * dR, rel=1e-8)


def test_orbit_param_norms_and_domains():
    p = orbit_param(ActionCase("cpn_so", 2), 0.6, 0.3)
    assert np.linalg.norm(p.coords) == pytest.approx(1.0)
    q = orbit_param(ActionCase("cpn_torus", 2, (0.4,)), 0.5, 0.3)
    assert np.linalg.norm(q.coords) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        orbit_param(ActionCase("cpn_so", 2), 1.2, 0.0)
    with pytest.raises(DomainError):
        orbit_param(ActionCase("cn_torus", 2, (0.3, -0.25)), 0.4, 0.0)
    flat = orbit_param(ActionCase("cn_so", 2), 1.5, 0.2)
    assert np.linalg.norm(flat.coords) == pytest.approx(1.5)


def test_normalized_projective_torus_profile():
    # the projective torus functional reduces to the n = 1 rotation form
    case = ActionCase("cpn_torus", 2, (0.4,))
    hx, ht = hsiang_lawson_phi_form(case, 0.7)
    assert hx == pytest.approx(1.0)
    assert ht == pytest.approx(math.sin(0.7) ** 2 * math.cos(0.7) ** 2)
    with pytest.raises(DomainError):
        hsiang_lawson_phi_form(ActionCase("cn_so", 2), 0.5)
