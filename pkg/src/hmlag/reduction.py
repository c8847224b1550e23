"""Orbit-space parametrizations, induced metrics and Hsiang-Lawson metrics.

Each case fixes one canonical radial coordinate in which all solver work
happens: the angle phi for the projective cases (after r = sin(phi) resp.
r = sqrt(delta) sin(phi)), the radius r for the flat cases.  The
geometric radial parameter r is still exposed for parametrization and
for the r-coordinate metric evaluators.

Dropped "up to a constant" volume factors are fixed to 1; the constant K
of the quotient equation absorbs them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import (
    CN_SO,
    CN_TORUS,
    CPN_SO,
    CPN_TORUS,
    FLAT,
    PROJECTIVE,
    ActionCase,
    AmbientPoint,
)
from .errors import DomainError

DEFAULT_COLLAR = 1e-9


def det_phi(n: int, c, r: float) -> float:
    """Determinant of the torus orbit Gram matrix Phi.

    Phi has diagonal 2r^2 + c_i and off-diagonal r^2; the determinant is
    sum_j r^2 prod_{k != j}(r^2 + c_k) + prod_k (r^2 + c_k).
    """
    c = np.asarray(c, dtype=float)
    if c.size != n:
        raise DomainError("det_phi needs n level constants")
    s = r * r + c
    if np.any(s <= 0.0):
        raise DomainError("det_phi needs r^2 + c_k > 0 for all k")
    prod = float(np.prod(s))
    return float(r * r * prod * np.sum(1.0 / s) + prod)


def _torus_poly(c: np.ndarray, r: float):
    """P = prod(r^2 + c_k), D = det(Phi) and their r-derivatives."""
    s = r * r + c
    if np.any(s <= 0.0):
        raise DomainError("r^2 + c_k must be positive")
    P = float(np.prod(s))
    T = float(np.sum(1.0 / s))
    Pp = 2.0 * r * P * T
    Tp = -2.0 * r * float(np.sum(1.0 / s**2))
    D = P * (1.0 + r * r * T)
    Dp = Pp * (1.0 + r * r * T) + P * (2.0 * r * T + r * r * Tp)
    return P, Pp, D, Dp


@dataclass(frozen=True)
class MetricProfile:
    """Metric data of one orbit space.

    ``coordinate`` names the canonical radial coordinate.  ``h_xx``/``h_tt``
    are the Hsiang-Lawson coefficients in that coordinate (with analytic
    derivatives ``dh_xx``/``dh_tt``), ``volume`` the orbit-volume function.
    ``r_of_x``/``x_of_r`` convert to the parametrization radius.
    """

    case: ActionCase
    coordinate: str
    x_min: float
    x_max: float
    collar: float
    h_xx: Callable[[float], float]
    h_tt: Callable[[float], float]
    dh_xx: Callable[[float], float]
    dh_tt: Callable[[float], float]
    volume: Callable[[float], float]
    r_of_x: Callable[[float], float]
    x_of_r: Callable[[float], float]

    def check(self, x: float) -> float:
        """Validate x against the open domain (with the epsilon collar)."""
        x = float(x)
        if not math.isfinite(x):
            raise DomainError("radial coordinate must be finite")
        if x <= self.x_min + self.collar:
            raise DomainError(f"{x} at or below singular boundary {self.x_min}")
        if math.isfinite(self.x_max) and x >= self.x_max - self.collar:
            raise DomainError(f"{x} at or above singular boundary {self.x_max}")
        return x

    def contains(self, x: float) -> bool:
        try:
            self.check(x)
        except DomainError:
            return False
        return True

    def sample(self, count: int, pad: float = 1e-3):
        """Evenly spaced interior points, for scans and property tests."""
        lo = self.x_min + pad
        hi = self.x_max - pad if math.isfinite(self.x_max) else self.x_min + 5.0
        return np.linspace(lo, hi, count)


def make_profile(case: ActionCase, collar: float = DEFAULT_COLLAR) -> MetricProfile:
    n = case.n
    if case.variant == CPN_SO:
        return MetricProfile(
            case=case,
            coordinate="phi",
            x_min=0.0,
            x_max=math.pi / 2,
            collar=collar,
            h_xx=lambda x: math.sin(x) ** (2 * n - 2),
            h_tt=lambda x: math.sin(x) ** (2 * n) * math.cos(x) ** 2,
            dh_xx=lambda x: (2 * n - 2) * math.sin(x) ** (2 * n - 3) * math.cos(x),
            dh_tt=lambda x: 2.0
            * math.sin(x) ** (2 * n - 1)
            * math.cos(x)
            * (n * math.cos(x) ** 2 - math.sin(x) ** 2),
            volume=lambda x: math.sin(x) ** (n - 1),
            r_of_x=math.sin,
            x_of_r=math.asin,
        )
    if case.variant == CPN_TORUS:
        sqrt_delta = math.sqrt(case.delta)
        return MetricProfile(
            case=case,
            coordinate="phi",
            x_min=0.0,
            x_max=math.pi / 2,
            collar=collar,
            h_xx=lambda x: 1.0,
            h_tt=lambda x: math.sin(x) ** 2 * math.cos(x) ** 2,
            dh_xx=lambda x: 0.0,
            dh_tt=lambda x: 2.0
            * math.sin(x)
            * math.cos(x)
            * (math.cos(x) ** 2 - math.sin(x) ** 2),
            volume=lambda x: 1.0,
            r_of_x=lambda x: sqrt_delta * math.sin(x),
            x_of_r=lambda r: math.asin(r / sqrt_delta),
        )
    if case.variant == CN_SO:
        return MetricProfile(
            case=case,
            coordinate="r",
            x_min=0.0,
            x_max=math.inf,
            collar=collar,
            h_xx=lambda x: x ** (2 * n),
            h_tt=lambda x: x ** (2 * n + 2),
            dh_xx=lambda x: 2 * n * x ** (2 * n - 1),
            dh_tt=lambda x: (2 * n + 2) * x ** (2 * n + 1),
            volume=lambda x: x**n,
            r_of_x=lambda x: x,
            x_of_r=lambda r: r,
        )
    # cn_torus
    c = np.asarray(case.c, dtype=float)
    sqrt_sigma = math.sqrt(case.sigma)

    def h_xx(x):
        P, _, D, _ = _torus_poly(c, x)
        return D * D / P

    def h_tt(x):
        P, _, _, _ = _torus_poly(c, x)
        return x * x * P

    def dh_xx(x):
        P, Pp, D, Dp = _torus_poly(c, x)
        return (2.0 * D * Dp * P - D * D * Pp) / (P * P)

    def dh_tt(x):
        P, Pp, _, _ = _torus_poly(c, x)
        return 2.0 * x * P + x * x * Pp

    def volume(x):
        _, _, D, _ = _torus_poly(c, x)
        return math.sqrt(D)

    return MetricProfile(
        case=case,
        coordinate="r",
        x_min=sqrt_sigma,
        x_max=math.inf,
        collar=collar,
        h_xx=h_xx,
        h_tt=h_tt,
        dh_xx=dh_xx,
        dh_tt=dh_tt,
        volume=volume,
        r_of_x=lambda x: x,
        x_of_r=lambda r: r,
    )


def orbit_param(case: ActionCase, r: float, theta: float) -> AmbientPoint:
    """Ambient representative point of the orbit at (r, theta)."""
    n = case.n
    r = float(r)
    phase = complex(math.cos(theta), math.sin(theta))
    if case.variant == CPN_SO:
        if not 0.0 <= r <= 1.0:
            raise DomainError("cpn_so needs r in [0, 1]")
        z = np.zeros(n + 1, dtype=complex)
        z[0] = math.sqrt(max(0.0, 1.0 - r * r))
        z[1] = r * phase
        return AmbientPoint(z, PROJECTIVE)
    if case.variant == CPN_TORUS:
        delta = case.delta
        if not 0.0 <= r <= math.sqrt(delta):
            raise DomainError("cpn_torus needs r in [0, sqrt(delta)]")
        z = np.zeros(n + 1, dtype=complex)
        z[0] = math.sqrt(max(0.0, delta - r * r))
        for j, cj in enumerate(case.c):
            z[j + 1] = math.sqrt(cj)
        z[n] = r * phase
        return AmbientPoint(z, PROJECTIVE)
    if case.variant == CN_SO:
        if r < 0.0:
            raise DomainError("cn_so needs r >= 0")
        z = np.zeros(n + 1, dtype=complex)
        z[0] = r * phase
        return AmbientPoint(z, FLAT)
    # cn_torus
    if r < math.sqrt(case.sigma):
        raise DomainError("cn_torus needs r >= sqrt(sigma)")
    z = np.zeros(n + 1, dtype=complex)
    for k, ck in enumerate(case.c):
        z[k] = math.sqrt(max(0.0, r * r + ck))
    z[n] = r * phase
    return AmbientPoint(z, FLAT)


def induced_metric(case: ActionCase, r: float, collar: float = DEFAULT_COLLAR):
    """Diagonal coefficients (g_rr, g_tt) of the induced orbit-space metric
    in the radial coordinate r.  Cross terms vanish in all cases."""
    r = float(r)
    n = case.n
    if case.variant == CPN_SO:
        if not collar < r < 1.0 - collar:
            raise DomainError("cpn_so induced metric needs r in (0, 1)")
        return 1.0 / (1.0 - r * r), r * r * (1.0 - r * r)
    if case.variant == CPN_TORUS:
        delta = case.delta
        if not collar < r < math.sqrt(delta) - collar:
            raise DomainError("cpn_torus induced metric needs r in (0, sqrt(delta))")
        return 1.0 / (delta - r * r), r * r * (delta - r * r) / (delta * delta)
    if case.variant == CN_SO:
        if r <= collar:
            raise DomainError("cn_so induced metric needs r > 0")
        return 1.0, r * r
    c = np.asarray(case.c, dtype=float)
    if r <= math.sqrt(case.sigma) + collar:
        raise DomainError("cn_torus induced metric needs r > sqrt(sigma)")
    P, _, D, _ = _torus_poly(c, r)
    return D / P, r * r * P / D


def orbit_volume(case: ActionCase, r: float) -> float:
    """Orbit volume at radius r, up to the fixed constant (set to 1)."""
    r = float(r)
    n = case.n
    if case.variant == CPN_SO:
        if not 0.0 <= r <= 1.0:
            raise DomainError("cpn_so needs r in [0, 1]")
        return r ** (n - 1)
    if case.variant == CPN_TORUS:
        if not 0.0 <= r <= math.sqrt(case.delta):
            raise DomainError("cpn_torus needs r in [0, sqrt(delta)]")
        return 1.0
    if case.variant == CN_SO:
        if r < 0.0:
            raise DomainError("cn_so needs r >= 0")
        return r**n
    return math.sqrt(det_phi(case.n, case.c, r))


def hsiang_lawson_metric(case: ActionCase, r: float, collar: float = DEFAULT_COLLAR):
    """Hsiang-Lawson coefficients V^2 (g_rr, g_tt) in the r-coordinate."""
    g_rr, g_tt = induced_metric(case, r, collar)
    v2 = orbit_volume(case, r) ** 2
    return v2 * g_rr, v2 * g_tt


def hsiang_lawson_phi_form(case: ActionCase, phi: float):
    """Canonical phi-coordinate form for the projective cases.

    cpn_so: sin^{2n-2}(phi) (1, sin^2 phi cos^2 phi); cpn_torus: the
    normalized (1, sin^2 phi cos^2 phi).
    """
    if case.variant not in (CPN_SO, CPN_TORUS):
        raise DomainError("phi-form exists for the projective cases only")
    profile = make_profile(case)
    phi = profile.check(phi)
    return profile.h_xx(phi), profile.h_tt(phi)
