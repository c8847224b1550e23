"""Reconstruction of ambient Lagrangian submanifolds from quotient curves.

A solved quotient curve (theta, x(theta)) sweeps out a full submanifold:
each curve point carries the whole group orbit.  This module samples those
sweeps into point clouds with explicit tangent frames, lifts projective
clouds through the Hopf fibration, builds the explicit constant-radius
immersions, and exports everything to CSV/OBJ/PLY.

Tangent frames are {curve direction} followed by the orbit directions of
the acting group; projective frames are Hopf-horizontalized so that the
Fubini-Study form can be evaluated on the unit-sphere representatives.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .ambient import (
    CN_SO,
    CN_TORUS,
    CPN_SO,
    CPN_TORUS,
    FLAT,
    PROJECTIVE,
    ActionCase,
    AmbientPoint,
    hermitian,
    hopf_lift_frame,
    horizontal_project,
    is_horizontal,
)
from .errors import InvalidInput, IoError, PreconditionError
from .reduced_ode import (
    InitialCondition,
    ReducedProblem,
    constant_solutions,
    lambda_from_ic,
)
from .reduction import induced_metric
from .solver import Classification, Trajectory

_FRAME_GRAM_TOL = 1e-10
_POLE_PAD = 0.3  # sphere polar angles sampled inside (pad, pi - pad)


@dataclass
class ImmersionCloud:
    """Sampled immersion: (parameters, point, tangent frame) triples.

    Frame rows span the tangent space of the swept submanifold at the
    sample; their count equals its dimension.
    """

    samples: list
    case: ActionCase
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def frame_dim(self) -> int:
        return self.samples[0][2].shape[0] if self.samples else 0

    def validate(self) -> "ImmersionCloud":
        """Check frame independence and, on projective targets,
        Hopf-horizontality of every frame vector."""
        for _, point, frame in self.samples:
            gram = (frame @ frame.conj().T).real
            if np.linalg.det(gram) <= _FRAME_GRAM_TOL:
                raise InvalidInput("tangent frame is (near) linearly dependent")
            if point.space == PROJECTIVE:
                for row in frame:
                    if not is_horizontal(point.coords, row):
                        raise InvalidInput("projective frame vector is not horizontal")
        return self


# -- sphere parametrization ---------------------------------------------

def sphere_point(psi) -> np.ndarray:
    """Point of S^d from polar angles psi_1..psi_{d-1} in (0, pi) and
    azimuth psi_d in [0, 2pi)."""
    psi = np.asarray(psi, dtype=float)
    d = psi.size
    u = np.empty(d + 1)
    run = 1.0
    for k in range(d):
        u[k] = run * math.cos(psi[k])
        run *= math.sin(psi[k])
    u[d] = run
    return u

def sphere_tangents(psi) -> np.ndarray:
    """Rows d(sphere_point)/d(psi_j); full rank away from the poles."""
    psi = np.asarray(psi, dtype=float)
    d = psi.size
    sin, cos = np.sin(psi), np.cos(psi)
    out = np.zeros((d, d + 1))
    for j in range(d):
        pref = float(np.prod(sin[:j]))
        out[j, j] = -pref * sin[j]
        run = pref * cos[j]
        for k in range(j + 1, d + 1):
            out[j, k] = run * (cos[k] if k < d else 1.0)
            if k < d:
                run *= sin[k]
    return out


# -- orbit geometry per case --------------------------------------------

def orbit_angle_axes(case: ActionCase, resolution: int):
    """One sampling grid per orbit angle.

    Sphere orbits use polar angles away from the poles (where the
    parametrization degenerates) and a full azimuth; torus orbits use full
    circles throughout.
    """
    if resolution < 4:
        raise InvalidInput("orbit resolution must be at least 4")
    polar = np.linspace(_POLE_PAD, math.pi - _POLE_PAD, resolution)
    azimuth = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
    if case.variant == CPN_SO:
        d = case.n - 1
    elif case.variant == CN_SO:
        d = case.n
    elif case.variant == CPN_TORUS:
        return [azimuth] * (case.n - 1)
    else:
        return [azimuth] * case.n
    if d == 0:
        return []
    return [polar] * (d - 1) + [azimuth]


def orbit_point_frame(case: ActionCase, r: float, rdot: float, theta: float, ang):
    """Ambient point, curve direction, and orbit directions at one sample.

    ang holds the orbit angles from orbit_angle_axes.  The curve direction
    is d/dtheta along the trajectory (Hopf-horizontalized on projective
    targets, as are the torus-action orbit directions).
    """
    ang = np.asarray(ang, dtype=float)
    n = case.n
    phase = complex(math.cos(theta), math.sin(theta))
    if case.variant == CPN_SO:
        u = sphere_point(ang)            # S^{n-1}
        tang = sphere_tangents(ang)
        z = np.zeros(n + 1, dtype=complex)
        z[0] = math.sqrt(max(0.0, 1.0 - r * r))
        z[1:] = r * phase * u
        orbit = np.zeros((n - 1, n + 1), dtype=complex)
        orbit[:, 1:] = r * phase * tang  # already horizontal
        curve = np.zeros(n + 1, dtype=complex)
        curve[0] = -r * rdot / z[0].real
        curve[1:] = (rdot + 1j * r) * phase * u
        curve = horizontal_project(z, curve)
        return AmbientPoint(z, PROJECTIVE), curve, orbit
    if case.variant == CPN_TORUS:
        delta = case.delta
        z = np.zeros(n + 1, dtype=complex)
        z[0] = math.sqrt(max(0.0, delta - r * r))
        for j, cj in enumerate(case.c):
            z[j + 1] = math.sqrt(cj) * complex(math.cos(ang[j]), math.sin(ang[j]))
        z[n] = r * phase
        orbit = np.zeros((n - 1, n + 1), dtype=complex)
        for j in range(n - 1):
            raw = np.zeros(n + 1, dtype=complex)
            raw[j + 1] = 1j * z[j + 1]
            orbit[j] = horizontal_project(z, raw)
        curve = np.zeros(n + 1, dtype=complex)
        curve[0] = -r * rdot / z[0].real
        curve[n] = (rdot + 1j * r) * phase
        curve = horizontal_project(z, curve)
        return AmbientPoint(z, PROJECTIVE), curve, orbit
    if case.variant == CN_SO:
        u = sphere_point(ang)            # S^n
        tang = sphere_tangents(ang)
        z = r * phase * u.astype(complex)
        orbit = r * phase * tang.astype(complex)
        curve = (rdot + 1j * r) * phase * u
        return AmbientPoint(z, FLAT), curve, orbit
    # cn_torus: k-th circle rotates z_k forward and z_{n+1} backward
    beta = ang
    z = np.zeros(n + 1, dtype=complex)
    for k, ck in enumerate(case.c):
        z[k] = math.sqrt(max(0.0, r * r + ck)) * complex(
            math.cos(beta[k]), math.sin(beta[k])
        )
    last_arg = theta - float(np.sum(beta))
    z[n] = r * complex(math.cos(last_arg), math.sin(last_arg))
    orbit = np.zeros((n, n + 1), dtype=complex)
    for k in range(n):
        orbit[k, k] = 1j * z[k]
        orbit[k, n] = -1j * z[n]
    curve = np.zeros(n + 1, dtype=complex)
    for k, ck in enumerate(case.c):
        curve[k] = r * rdot / math.sqrt(r * r + ck) * z[k] / abs(z[k])
    curve[n] = (rdot + 1j * r) * z[n] / abs(z[n])
    return AmbientPoint(z, FLAT), curve, orbit


def radius_and_rate(problem: ReducedProblem, x: float, xp: float):
    """Parametrization radius r and dr/dtheta from the canonical state."""
    case = problem.case
    if case.variant == CPN_SO:
        return math.sin(x), math.cos(x) * xp
    if case.variant == CPN_TORUS:
        s = math.sqrt(case.delta)
        return s * math.sin(x), s * math.cos(x) * xp
    return x, xp


# -- sweeps and lifts ---------------------------------------------------

def _curve_states(trajectory: Trajectory, curve_resolution: int):
    """(theta, x, xp) at curve_resolution points along the trajectory."""
    theta = np.linspace(trajectory.theta[0], trajectory.theta[-1], curve_resolution)
    if trajectory.dense is not None:
        states = [trajectory.dense(t) for t in theta]
        return [(float(t), float(s[0]), float(s[1])) for t, s in zip(theta, states)]
    x = np.interp(theta, trajectory.theta, trajectory.x)
    xp = np.interp(theta, trajectory.theta, trajectory.xp)
    return list(zip(theta.tolist(), x.tolist(), xp.tolist()))


def sweep_orbit(
    trajectory: Trajectory, orbit_resolution: int, curve_resolution: int
) -> ImmersionCloud:
    """Sample the submanifold swept by the group orbits over the curve.

    Emits, for curve_resolution curve points, the orbit through each point
    sampled on a product grid of orbit_resolution per angle, with frames
    {curve direction} + {orbit directions}.
    """
    if curve_resolution < 4 or orbit_resolution < 4:
        raise InvalidInput("resolutions must be at least 4")
    problem = trajectory.problem
    case = problem.case
    axes = orbit_angle_axes(case, orbit_resolution)
    samples = []
    for theta, x, xp in _curve_states(trajectory, curve_resolution):
        x = problem.profile.check(x)  # DomainError inside the collar
        r, rdot = radius_and_rate(problem, x, xp)
        for ang in itertools.product(*axes):
            point, curve, orbit = orbit_point_frame(case, r, rdot, theta, ang)
            frame = np.vstack([curve[None, :], orbit])
            # unit rows keep the Lagrangian residual scale-free at large radius
            frame /= np.linalg.norm(frame, axis=1)[:, None]
            samples.append(((theta,) + tuple(ang), point, frame))
    meta = {
        "source": trajectory.classification.kind,
        "orbit_resolution": orbit_resolution,
        "curve_resolution": curve_resolution,
    }
    return ImmersionCloud(samples, case, meta).validate()


def hopf_lift_cloud(cloud: ImmersionCloud, fiber_resolution: int) -> ImmersionCloud:
    """Preimage of a projective cloud under the Hopf projection.

    Each sample spawns fiber_resolution phase copies e^{it} z with the
    frame rotated along and augmented by the vertical direction iz.
    """
    if fiber_resolution < 4:
        raise InvalidInput("fiber resolution must be at least 4")
    fiber = np.linspace(0.0, 2.0 * math.pi, fiber_resolution, endpoint=False)
    samples = []
    for params, point, frame in cloud.samples:
        lifted = hopf_lift_frame(point, frame)  # InvalidInput if not horizontal
        for t in fiber:
            phase = complex(math.cos(t), math.sin(t))
            z = phase * point.coords
            samples.append((params + (float(t),), AmbientPoint(z, FLAT), phase * lifted))
    meta = dict(cloud.meta, fiber_resolution=fiber_resolution, lifted=True)
    return ImmersionCloud(samples, cloud.case, meta).validate()


def constant_immersion(
    case: ActionCase, K: float, orbit_resolution: int = 8, curve_resolution: int = 8
) -> ImmersionCloud:
    """Cloud of the constant-radius solution of the case, if one exists."""
    problem = ReducedProblem(case, K)
    roots = constant_solutions(problem)
    if not roots:
        raise PreconditionError("the case has no constant solution for this K")
    r_star = roots[0]
    lam = lambda_from_ic(problem, InitialCondition(r_star, 0.0))
    theta = np.linspace(0.0, 2.0 * math.pi, curve_resolution)
    traj = Trajectory(
        problem,
        theta,
        np.full(theta.size, r_star),
        np.zeros(theta.size),
        lam,
        0.0,
        Classification("constant"),
    )
    return sweep_orbit(traj, orbit_resolution, curve_resolution)


# -- smooth immersion evaluators (for finite-difference verification) ----

def constant_immersion_map(case: ActionCase, K: float):
    """Evaluator u -> point of the flat constant-radius immersion.

    Parameters are (theta, orbit angles); returns the complex coordinate
    vector.  Flat cases only: projective constants are verified through
    their Hopf lifts.
    """
    if case.variant not in (CN_SO, CN_TORUS):
        raise PreconditionError("flat-ambient evaluator: flat cases only")
    roots = constant_solutions(ReducedProblem(case, K))
    if not roots:
        raise PreconditionError("the case has no constant solution for this K")
    r = roots[0]
    n = case.n

    if case.variant == CN_SO:

        def f(u):
            u = np.asarray(u, dtype=float)
            phase = complex(math.cos(u[0]), math.sin(u[0]))
            return r * phase * sphere_point(u[1:]).astype(complex)

        return f

    c = np.asarray(case.c, dtype=float)

    def f(u):
        u = np.asarray(u, dtype=float)
        beta = u[1:]
        z = np.empty(n + 1, dtype=complex)
        for k in range(n):
            z[k] = math.sqrt(r * r + c[k]) * complex(
                math.cos(beta[k]), math.sin(beta[k])
            )
        arg = u[0] - float(np.sum(beta))
        z[n] = r * complex(math.cos(arg), math.sin(arg))
        return z

    return f


def lagrangian_plane_map(n: int, theta0: float = 0.0):
    """Evaluator of the flat Lagrangian (n+1)-plane e^{i theta0} R^{n+1}."""
    phase = complex(math.cos(theta0), math.sin(theta0))

    def f(u):
        return phase * np.asarray(u, dtype=float).astype(complex)

    return f


def hopf_lift_map(trajectory: Trajectory):
    """Smooth evaluator of the Hopf lift of a projective torus solution.

    Parameters are (theta, beta_1..beta_{n-1}, t): the curve angle, the
    orbit angles and the fiber phase.  Needs the trajectory's dense
    interpolant for a smooth x(theta).
    """
    problem = trajectory.problem
    case = problem.case
    if case.variant != CPN_TORUS:
        raise PreconditionError("hopf_lift_map supports the projective torus case")
    if trajectory.dense is None:
        raise PreconditionError("hopf_lift_map needs a dense trajectory")
    delta = case.delta
    c = np.asarray(case.c, dtype=float)
    n = case.n

    def f(u):
        u = np.asarray(u, dtype=float)
        theta = u[0]
        x = float(trajectory.dense(theta)[0])
        r = math.sqrt(delta) * math.sin(x)
        z = np.empty(n + 1, dtype=complex)
        z[0] = math.sqrt(max(0.0, delta - r * r))
        for j in range(n - 1):
            z[j + 1] = math.sqrt(c[j]) * complex(math.cos(u[1 + j]), math.sin(u[1 + j]))
        z[n] = r * complex(math.cos(theta), math.sin(theta))
        phase = complex(math.cos(u[n]), math.sin(u[n]))
        return phase * z

    return f


# -- volume consistency -------------------------------------------------

def numeric_orbit_volume(case: ActionCase, r: float, resolution: int = 33) -> float:
    """Orbit volume by integrating sqrt(det Gram) over the angle grid.

    Independent of the closed-form orbit_volume up to the fixed constant
    (the unit-sphere or torus volume) dropped there.
    """
    axes = orbit_angle_axes(case, max(resolution, 4))
    if case.variant in (CPN_SO, CN_SO):
        # reinstate the poles: the volume element vanishes there
        axes = [np.linspace(0.0, math.pi, resolution) for _ in axes[:-1]] + [
            np.linspace(0.0, 2.0 * math.pi, resolution)
        ]
    else:
        axes = [np.linspace(0.0, 2.0 * math.pi, resolution) for _ in axes]
    if not axes:
        return 1.0

    def density(ang):
        _, _, orbit = orbit_point_frame(case, r, 0.0, 0.0, ang)
        gram = (orbit @ orbit.conj().T).real
        return math.sqrt(max(np.linalg.det(gram), 0.0))

    shape = tuple(a.size for a in axes)
    vals = np.empty(shape)
    for idx in np.ndindex(shape):
        vals[idx] = density([axes[k][i] for k, i in enumerate(idx)])
    for axis in reversed(range(len(axes))):
        vals = simpson(vals, x=axes[axis], axis=axis)
    return float(vals)


def volume_identity(
    trajectory: Trajectory, orbit_resolution: int = 33, max_curve_samples: int = 201
):
    """Submanifold volume versus quotient length, as (volume, kappa * length).

    volume integrates the numeric orbit volume times the curve speed in
    the induced quotient metric; kappa * length is the Hsiang-Lawson
    curve length scaled by the constant orbit-volume normalization kappa
    measured at the first sample.  The two agree for any trajectory.
    Dense trajectories are decimated to at most max_curve_samples curve
    points; both integrals use the same decimated grid, so the identity
    is unaffected.
    """
    problem = trajectory.problem
    case = problem.case
    theta, x, xp = trajectory.theta, trajectory.x, trajectory.xp
    if theta.size > max_curve_samples:
        stride = -(-theta.size // max_curve_samples)
        theta, x, xp = theta[::stride], x[::stride], xp[::stride]
    if theta.size < 5:
        raise PreconditionError("volume identity needs at least 5 curve samples")

    kappa = numeric_orbit_volume(case, radius_and_rate(problem, x[0], xp[0])[0],
                                 orbit_resolution) / problem.profile.volume(x[0])

    vol_density = np.empty(theta.size)
    hl_density = np.empty(theta.size)
    for i in range(theta.size):
        r, rdot = radius_and_rate(problem, x[i], xp[i])
        g_rr, g_tt = induced_metric(case, r)
        speed = math.sqrt(g_rr * rdot * rdot + g_tt)
        vol_density[i] = numeric_orbit_volume(case, r, orbit_resolution) * speed
        hl_density[i] = math.sqrt(
            problem.A(x[i]) * xp[i] * xp[i] + problem.B(x[i])
        )
    volume = float(simpson(vol_density, x=theta))
    length = float(simpson(hl_density, x=theta))
    return volume, kappa * length


# -- export -------------------------------------------------------------

# fixed linear projection to 3 real coordinates for OBJ/PLY output
# (Re z_0, Re z_1, Im z_1)
def _project3(z: np.ndarray):
    return float(z[0].real), float(z[1].real), float(z[1].imag)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_cloud(cloud: ImmersionCloud, fmt: str, path) -> None:
    """Write the cloud as CSV (full data) or OBJ/PLY (projected points).

    CSV columns: param_0..param_{k-1}, re_0, im_0, .., re_m, im_m, then
    frame_{i}_re_{j}, frame_{i}_im_{j} row-major over frame vectors.
    """
    if not cloud.samples:
        raise PreconditionError("cannot export an empty cloud")
    fmt = fmt.lower()
    if fmt not in ("csv", "obj", "ply"):
        raise InvalidInput(f"unknown export format {fmt!r}")
    k = len(cloud.samples[0][0])
    m = cloud.samples[0][1].m
    fdim = cloud.frame_dim
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            if fmt == "csv":
                header = [f"param_{i}" for i in range(k)]
                for j in range(m):
                    header += [f"re_{j}", f"im_{j}"]
                for i in range(fdim):
                    for j in range(m):
                        header += [f"frame_{i}_re_{j}", f"frame_{i}_im_{j}"]
                fh.write(",".join(header) + "\n")
                for params, point, frame in cloud.samples:
                    row = [_fmt(p) for p in params]
                    for z in point.coords:
                        row += [_fmt(z.real), _fmt(z.imag)]
                    for vec in frame:
                        for z in vec:
                            row += [_fmt(z.real), _fmt(z.imag)]
                    fh.write(",".join(row) + "\n")
            elif fmt == "obj":
                for _, point, _ in cloud.samples:
                    fh.write("v %s %s %s\n" % tuple(map(_fmt, _project3(point.coords))))
            else:
                fh.write("ply\nformat ascii 1.0\n")
                fh.write(f"element vertex {len(cloud.samples)}\n")
                fh.write("property float x\nproperty float y\nproperty float z\n")
                fh.write("end_header\n")
                for _, point, _ in cloud.samples:
                    fh.write("%s %s %s\n" % tuple(map(_fmt, _project3(point.coords))))
    except OSError as exc:
        raise IoError(f"could not write {path}: {exc}") from exc


def import_cloud_csv(path) -> list:
    """Read back an exported CSV as (params, coords, frame) float tuples."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip().split(",")
            k = sum(1 for h in header if h.startswith("param_"))
            m = sum(1 for h in header if h.startswith("re_"))
            rows = []
            for line in fh:
                vals = [float(v) for v in line.strip().split(",")]
                params = tuple(vals[:k])
                coords = np.array(
                    [complex(vals[k + 2 * j], vals[k + 2 * j + 1]) for j in range(m)]
                )
                rest = vals[k + 2 * m:]
                fdim = len(rest) // (2 * m) if m else 0
                frame = np.array(
                    [
                        [
                            complex(rest[2 * (i * m + j)], rest[2 * (i * m + j) + 1])
                            for j in range(m)
                        ]
                        for i in range(fdim)
                    ]
                )
                rows.append((params, coords, frame))
        return rows
    except OSError as exc:
        raise IoError(f"could not read {path}: {exc}") from exc
