"""Figure rendering for the command-line report paths.

Plots are an opt-in byproduct of the CSV artifacts, written next to them;
all figures use the non-interactive Agg backend so batch runs never need
a display.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import IoError
from .lift import radius_and_rate
from .solver import Trajectory


def _save(fig, path):
    try:
        fig.savefig(path, dpi=120)
    except OSError as exc:
        raise IoError(f"could not write {path}: {exc}") from exc
    finally:
        plt.close(fig)


def plot_trajectory(trajectory: Trajectory, path) -> None:
    """Radial profile x(theta) and the polar image of the quotient curve."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(trajectory.theta, trajectory.x, lw=1.0)
    ax1.set_xlabel("theta")
    ax1.set_ylabel("x")
    ax1.set_title(f"{trajectory.problem.case.variant}: radial profile")
    r = np.array(
        [
            radius_and_rate(trajectory.problem, x, 0.0)[0]
            for x in trajectory.x
        ]
    )
    ax2.plot(r * np.cos(trajectory.theta), r * np.sin(trajectory.theta), lw=1.0)
    ax2.set_aspect("equal")
    ax2.set_title("quotient curve (polar image)")
    fig.tight_layout()
    _save(fig, path)


def plot_scan(a_values, omega_over_pi, path) -> None:
    """Period ratio over the scanned starts, with integer-fraction guides."""
    a_values = np.asarray(a_values, dtype=float)
    omega_over_pi = np.asarray(omega_over_pi, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(a_values, omega_over_pi, ".-", ms=3, lw=0.8)
    lo, hi = np.nanmin(omega_over_pi), np.nanmax(omega_over_pi)
    for q in (1, 2, 3, 4):
        for p in range(math.floor(lo * q), math.ceil(hi * q) + 1):
            ax.axhline(p / q, color="0.85", lw=0.5, zorder=0)
    ax.set_xlabel("a")
    ax.set_ylabel("Omega_a / pi")
    fig.tight_layout()
    _save(fig, path)


def plot_cloud(cloud, path) -> None:
    """Projected 3D scatter of a point cloud (same projection as OBJ/PLY)."""
    from .lift import _project3

    pts = np.array([_project3(p.coords) for _, p, _ in cloud.samples])
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="3d")
    ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=3)
    ax.set_title(f"{cloud.case.variant} cloud ({len(cloud)} samples)")
    _save(fig, path)
