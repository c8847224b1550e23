"""Ambient spaces, group actions, moment maps and the Hopf fibration.

Points of complex projective space are stored as unit-norm representatives
in C^{n+1}; all Fubini-Study computations happen on Hopf-horizontal lifts,
so no chart atlas is needed.  Flat space points are plain complex vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

FLAT = "flat"
PROJECTIVE = "projective"

CPN_SO = "cpn_so"
CPN_TORUS = "cpn_torus"
CN_SO = "cn_so"
CN_TORUS = "cn_torus"

ALL_VARIANTS = (CPN_SO, CPN_TORUS, CN_SO, CN_TORUS)

_UNIT_TOL = 1e-10
_HORIZ_TOL = 1e-8


@dataclass(frozen=True)
class AmbientPoint:
    """A point of flat C^m or of CP^n via its unit sphere representative."""

    coords: np.ndarray
    space: str = FLAT

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=complex)
        object.__setattr__(self, "coords", coords)
        if coords.ndim != 1 or coords.size == 0:
            raise InvalidInput("coords must be a nonempty 1-d complex vector")
        if self.space not in (FLAT, PROJECTIVE):
            raise InvalidInput(f"unknown space tag {self.space!r}")
        if self.space == PROJECTIVE:
            norm = np.linalg.norm(coords)
            if abs(norm - 1.0) > _UNIT_TOL:
                raise InvalidInput(
                    f"projective representative must be unit norm, got {norm}"
                )

    @property
    def m(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class ActionCase:
    """One of the four cohomogeneity-one group actions and its level data."""

    variant: str
    n: int
    c: tuple = ()

    def __post_init__(self):
        if self.variant not in ALL_VARIANTS:
            raise InvalidInput(f"unknown case variant {self.variant!r}")
        if self.n < 1:
            raise InvalidInput("n must be a positive integer")
        c = tuple(float(v) for v in self.c)
        object.__setattr__(self, "c", c)
        if self.variant == CPN_TORUS:
            if len(c) != self.n - 1:
                raise InvalidInput("cpn_torus needs n-1 level constants")
            if any(v <= 0 for v in c) or sum(c) >= 1.0:
                raise InvalidInput("cpn_torus needs c_j > 0 with sum(c) < 1")
        elif self.variant == CN_TORUS:
            if len(c) != self.n:
                raise InvalidInput("cn_torus needs n level constants")
            if any(v == 0.0 for v in c):
                raise InvalidInput("cn_torus needs every c_j nonzero")
        elif c:
            raise InvalidInput("SO cases carry no level constants")

    @property
    def is_projective(self) -> bool:
        return self.variant in (CPN_SO, CPN_TORUS)

    @property
    def ambient_dim(self) -> int:
        """Number of complex coordinates of the ambient model (always n+1)."""
        return self.n + 1

    @property
    def delta(self) -> float:
        """1 - sum(c), the level margin of the projective torus case."""
        if self.variant != CPN_TORUS:
            raise InvalidInput("delta is defined for cpn_torus only")
        return 1.0 - sum(self.c)

    @property
    def sigma(self) -> float:
        """max(-c_i, 0), the lower radial barrier of the flat torus case."""
        if self.variant != CN_TORUS:
            raise InvalidInput("sigma is defined for cn_torus only")
        return max(0.0, max(-v for v in self.c))


def _check_point(case: ActionCase, p: AmbientPoint) -> np.ndarray:
    want = PROJECTIVE if case.is_projective else FLAT
    if p.space != want:
        raise InvalidInput(f"case {case.variant} needs a {want} point")
    if p.m != case.ambient_dim:
        raise InvalidInput(
            f"case {case.variant} with n={case.n} needs {case.ambient_dim} "
            f"coordinates, got {p.m}"
        )
    return p.coords


def moment_map(case: ActionCase, p: AmbientPoint) -> np.ndarray:
    """Moment value of the case's group action at p.

    Values are reported in real coordinates with the -i/2 and 1/|z|^2
    normalization factors stripped:

    * cpn_so   -- Im(z_i conj(z_j)) for 1 <= i < j <= n (lexicographic),
      coordinates z_1..z_n of the unit representative;
    * cpn_torus -- (|z_1|^2, ..., |z_{n-1}|^2) of the unit representative;
    * cn_so    -- Im(z_i conj(z_j)) for 1 <= i < j <= n+1;
    * cn_torus -- (|z_1|^2 - |z_{n+1}|^2, ..., |z_n|^2 - |z_{n+1}|^2).
    """
    z = _check_point(case, p)
    if case.variant == CPN_SO:
        zz = z[1:]
        return _pair_imag(zz)
    if case.variant == CN_SO:
        return _pair_imag(z)
    if case.variant == CPN_TORUS:
        return np.abs(z[1:case.n]) ** 2
    # cn_torus
    last = abs(z[-1]) ** 2
    return np.abs(z[:-1]) ** 2 - last


def _pair_imag(z: np.ndarray) -> np.ndarray:
    out = []
    for i in range(z.size):
        for j in range(i + 1, z.size):
            out.append((z[i] * np.conj(z[j])).imag)
    return np.asarray(out, dtype=float)


def hermitian(u, v) -> complex:
    """Hermitian product conj(u) . v."""
    return complex(np.vdot(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)))


def kaehler_form(p: AmbientPoint, u, v) -> float:
    """Kaehler two-form omega(u, v) at p.

    Flat space: the standard sum dx_j ^ dy_j.  Projective points: u, v must
    be Hopf-horizontal representatives; the Fubini-Study form is then the
    restriction of the flat form of C^{n+1}.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != p.coords.shape or v.shape != p.coords.shape:
        raise InvalidInput("tangent vectors must match the point dimension")
    if p.space == PROJECTIVE:
        for w in (u, v):
            if not is_horizontal(p.coords, w):
                raise InvalidInput("projective tangent vectors must be horizontal")
    return hermitian(u, v).imag


def is_horizontal(z: np.ndarray, u: np.ndarray, tol: float = _HORIZ_TOL) -> bool:
    """True if u is orthogonal to both z and iz (complex-orthogonal to z)."""
    scale = max(1.0, float(np.linalg.norm(u)))
    return abs(hermitian(z, u)) <= tol * scale


def horizontal_project(z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Project u onto the Hopf-horizontal space at the unit representative z."""
    return u - hermitian(z, u) * z


def hopf_project(z) -> AmbientPoint:
    """Projective point with z itself as the chosen unit representative."""
    z = np.asarray(z, dtype=complex)
    if abs(np.linalg.norm(z) - 1.0) > _UNIT_TOL:
        raise InvalidInput("hopf_project needs a unit vector")
    return AmbientPoint(z, PROJECTIVE)


def hopf_vertical(z) -> np.ndarray:
    """Unit vertical vector of the Hopf fibration at z, namely iz."""
    z = np.asarray(z, dtype=complex)
    if abs(np.linalg.norm(z) - 1.0) > _UNIT_TOL:
        raise InvalidInput("hopf_vertical needs a unit vector")
    return 1j * z


def hopf_lift_frame(p: AmbientPoint, frame) -> np.ndarray:
    """Tangent frame of the Hopf preimage: horizontal lifts plus iz.

    frame is a (k, n+1) array of Hopf-horizontal vectors at the
    representative p (k may be zero).  Returns a (k+1, n+1) array.
    """
    if p.space != PROJECTIVE:
        raise InvalidInput("hopf_lift_frame needs a projective point")
    z = p.coords
    frame = np.asarray(frame, dtype=complex).reshape(-1, z.size)
    for row in frame:
        if not is_horizontal(z, row):
            raise InvalidInput("frame vectors must be Hopf-horizontal")
    return np.vstack([frame, (1j * z)[None, :]])
