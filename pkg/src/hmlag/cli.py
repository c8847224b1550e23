"""Command-line front end.

Subcommands: solve, scan, closed, lift, verify, export.  Configuration is
read from an optional JSON file (--config) and overridden by flags; all
runs are deterministic and all floats are serialized with 17 significant
digits so artifacts round-trip exactly.

Exit codes: 0 success, 2 configuration error, 3 forbidden motion
constant, 4 verification failure, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .ambient import ALL_VARIANTS, ActionCase, CN_SO, CN_TORUS, CPN_SO, CPN_TORUS
from .errors import (
    BracketError,
    DegenerateParamError,
    DegenerateTurningPoint,
    DomainError,
    HmlagError,
    InvalidInput,
    IoError,
    NumericalDomainError,
    PreconditionError,
    SingularSlopeError,
    StateError,
    StepError,
    StiffnessError,
    TurningRegionError,
)
from .lift import (
    constant_immersion,
    export_cloud,
    hopf_lift_cloud,
    sweep_orbit,
)
from .reduced_ode import (
    InitialCondition,
    ReducedProblem,
    first_integral,
    forbidden_lambda,
    lambda_from_ic,
)
from .solver import (
    Trajectory,
    best_rational,
    closed_search,
    closure_residual,
    integrate,
    period_omega,
)
from .verify import lagrangian_residual, verify_trajectory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FORBIDDEN = 3
EXIT_VERIFY = 4
EXIT_NUMERIC = 5

_NUMERIC_ERRORS = (
    BracketError,
    DegenerateParamError,
    DegenerateTurningPoint,
    NumericalDomainError,
    SingularSlopeError,
    StepError,
    StiffnessError,
    TurningRegionError,
    IoError,
)


def _fmt(v) -> str:
    return format(float(v), ".17g")


@dataclass
class RunConfig:
    """Validated run configuration shared by all subcommands."""

    case: str = CPN_SO
    n: int = 2
    K: float = 0.05
    c: list = field(default_factory=list)
    a: float = 0.6
    b: float = 0.0
    span: float = 20.0
    tol: float = 1e-10
    a_min: float = 0.3
    a_max: float = 1.2
    count: int = 50
    q_max: int = 64
    outdir: str = "."
    fmt: str = "csv"
    orbit_resolution: int = 8
    curve_resolution: int = 16
    fiber_resolution: int = 8
    jobs: int = 1
    plot: bool = False
    constant: bool = False
    hopf: bool = False
    perturb: float = 0.0
    escape_radius: float | None = None

    def validate(self) -> "RunConfig":
        self.case = str(self.case).replace("-", "_")
        if self.case not in ALL_VARIANTS:
            raise InvalidInput(f"unknown case {self.case!r}")
        for name in ("K", "a", "b", "span", "tol", "a_min", "a_max", "perturb"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidInput(f"{name} must be finite")
            setattr(self, name, v)
        if not 1e-14 <= self.tol <= 1e-4:
            raise InvalidInput("tol must lie in [1e-14, 1e-4]")
        if self.count < 2:
            raise InvalidInput("scan count must be at least 2")
        if self.fmt not in ("csv", "obj", "ply"):
            raise InvalidInput(f"unknown export format {self.fmt!r}")
        if self.jobs < 1:
            raise InvalidInput("jobs must be positive")
        self.action_case()  # InvalidInput on bad (case, n, c)
        return self

    def action_case(self) -> ActionCase:
        return ActionCase(self.case, int(self.n), tuple(self.c))

    def problem(self) -> ReducedProblem:
        return ReducedProblem(self.action_case(), self.K)


def load_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"could not read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidInput("config file must hold a JSON object")
    cfg = RunConfig()
    known = set(asdict(cfg))
    for key, value in data.items():
        if key not in known:
            raise InvalidInput(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def _write(path: str, text: str) -> None:
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"could not write {path}: {exc}") from exc


def _report_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _solve_trajectory(cfg: RunConfig) -> Trajectory:
    problem = cfg.problem()
    return integrate(
        problem,
        InitialCondition(cfg.a, cfg.b),
        cfg.span,
        tol=cfg.tol,
        escape_radius=cfg.escape_radius,
    )


def cmd_solve(cfg: RunConfig) -> int:
    traj = _solve_trajectory(cfg)
    problem = traj.problem
    lines = ["theta,x,xp,drift"]
    for t, x, xp in zip(traj.theta, traj.x, traj.xp):
        drift = first_integral(problem, x, xp) + traj.lam
        lines.append(",".join((_fmt(t), _fmt(x), _fmt(xp), _fmt(drift))))
    _write(os.path.join(cfg.outdir, "solve_trajectory.csv"), "\n".join(lines) + "\n")
    cls = traj.classification
    _write(
        os.path.join(cfg.outdir, "solve_report.json"),
        _report_json(
            {
                "case": cfg.case,
                "lambda": _fmt(traj.lam),
                "classification": cls.kind,
                "theta_max": None if cls.theta_max is None else _fmt(cls.theta_max),
                "drift_max": _fmt(traj.drift_max),
                "samples": len(traj),
            }
        ),
    )
    if cfg.plot:
        from .plots import plot_trajectory

        plot_trajectory(traj, os.path.join(cfg.outdir, "solve_trajectory.png"))
    return EXIT_OK


def _scan_point(payload) -> tuple:
    """Worker: one scan row (a, lambda, omega) or an inadmissibility tag."""
    case, n, c, K, q_max, a = payload
    problem = ReducedProblem(ActionCase(case, n, tuple(c)), K)
    try:
        lam = lambda_from_ic(problem, InitialCondition(a, 0.0))
        if not forbidden_lambda(problem).admissible:
            return (a, lam, None)
        omega = period_omega(problem, a)
    except HmlagError:
        return (a, None, None)
    return (a, lam, omega)


def _scan_rows(cfg: RunConfig):
    payloads = [
        (cfg.case, int(cfg.n), list(cfg.c), cfg.K, cfg.q_max, float(a))
        for a in np.linspace(cfg.a_min, cfg.a_max, cfg.count)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_scan_point, payloads))
    else:
        results = [_scan_point(p) for p in payloads]
    return results


_SCAN_HEADER = "a,lambda,omega,omega_over_pi,p,q,closure_residual"


def _scan_csv_line(a, lam, omega, q_max, residual=None) -> str:
    p, q = best_rational(omega / math.pi, q_max)
    return ",".join(
        (
            _fmt(a),
            _fmt(lam),
            _fmt(omega),
            _fmt(omega / math.pi),
            str(p),
            str(q),
            "" if residual is None else _fmt(residual),
        )
    )


def cmd_scan(cfg: RunConfig) -> int:
    results = _scan_rows(cfg)
    lines = [_SCAN_HEADER]
    skipped = []
    ratios = []
    for a, lam, omega in results:
        if omega is None:
            skipped.append(a)
            continue
        ratios.append(omega / math.pi)
        lines.append(_scan_csv_line(a, lam, omega, cfg.q_max))
    _write(os.path.join(cfg.outdir, "scan_omega.csv"), "\n".join(lines) + "\n")
    _write(
        os.path.join(cfg.outdir, "scan_report.json"),
        _report_json(
            {
                "rows": len(lines) - 1,
                "skipped": [_fmt(a) for a in skipped],
                "ratio_range": None
                if not ratios
                else [_fmt(min(ratios)), _fmt(max(ratios))],
            }
        ),
    )
    if cfg.plot and ratios:
        from .plots import plot_scan

        kept = [a for a, lam, om in results if om is not None]
        plot_scan(kept, ratios, os.path.join(cfg.outdir, "scan_omega.png"))
    return EXIT_OK


def cmd_closed(cfg: RunConfig) -> int:
    case, n, c, K = cfg.case, int(cfg.n), tuple(cfg.c), cfg.K

    def factory():
        return ReducedProblem(ActionCase(case, n, c), K)

    a_grid = np.linspace(cfg.a_min, cfg.a_max, cfg.count)
    hits = closed_search(factory, a_grid, q_max=cfg.q_max)
    lines = [_SCAN_HEADER]
    reported = []
    for a, p, q in hits:
        problem = factory()
        lam = lambda_from_ic(problem, InitialCondition(a, 0.0))
        omega = period_omega(problem, a)
        residual = closure_residual(factory(), a, p, q)
        lines.append(_scan_csv_line(a, lam, omega, cfg.q_max, residual))
        reported.append({"a": _fmt(a), "p": p, "q": q, "residual": _fmt(residual)})
    _write(os.path.join(cfg.outdir, "closed_hits.csv"), "\n".join(lines) + "\n")
    doc = {"hits": reported}
    if not reported:
        # nothing closed on this grid: report the observed ratio range
        ratios = [om / math.pi for _, _, om in _scan_rows(cfg) if om is not None]
        doc["ratio_range"] = (
            None if not ratios else [_fmt(min(ratios)), _fmt(max(ratios))]
        )
    _write(os.path.join(cfg.outdir, "closed_report.json"), _report_json(doc))
    return EXIT_OK


def _ensure_outdir(cfg: RunConfig) -> None:
    try:
        os.makedirs(cfg.outdir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"could not create {cfg.outdir}: {exc}") from exc


def _build_cloud(cfg: RunConfig):
    if cfg.constant:
        cloud = constant_immersion(
            cfg.action_case(), cfg.K, cfg.orbit_resolution, cfg.curve_resolution
        )
    else:
        traj = _solve_trajectory(cfg)
        cloud = sweep_orbit(traj, cfg.orbit_resolution, cfg.curve_resolution)
    if cfg.hopf:
        cloud = hopf_lift_cloud(cloud, cfg.fiber_resolution)
    return cloud


def cmd_lift(cfg: RunConfig) -> int:
    _ensure_outdir(cfg)
    cloud = _build_cloud(cfg)
    export_cloud(cloud, "csv", os.path.join(cfg.outdir, "cloud.csv"))
    _write(
        os.path.join(cfg.outdir, "lift_report.json"),
        _report_json(
            {
                "samples": len(cloud),
                "frame_dim": cloud.frame_dim,
                "max_omega": _fmt(lagrangian_residual(cloud)),
                "meta": cloud.meta,
            }
        ),
    )
    if cfg.plot:
        from .plots import plot_cloud

        plot_cloud(cloud, os.path.join(cfg.outdir, "cloud.png"))
    return EXIT_OK


def cmd_export(cfg: RunConfig) -> int:
    _ensure_outdir(cfg)
    cloud = _build_cloud(cfg)
    export_cloud(cloud, cfg.fmt, os.path.join(cfg.outdir, f"cloud.{cfg.fmt}"))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    traj = _solve_trajectory(cfg)
    if cfg.perturb:
        # negative control: deform the curve so it is no longer a solution
        from dataclasses import replace

        traj = replace(
            traj,
            x=traj.x + cfg.perturb * np.sin(traj.theta),
            dense=None,
        )
    cloud = None
    if traj.classification.kind != "constant" or cfg.constant:
        cloud = sweep_orbit(traj, max(4, cfg.orbit_resolution // 2), 8)
    report = verify_trajectory(traj, cloud)
    _write(os.path.join(cfg.outdir, "verify_report.json"), report.to_json() + "\n")
    return EXIT_OK if report.all_passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmlag",
        description="construct, classify and verify the reduced Lagrangian curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--case", choices=[v.replace("_", "-") for v in ALL_VARIANTS])
    common.add_argument("--n", type=int)
    common.add_argument("--K", type=float)
    common.add_argument("--c", type=float, nargs="*")
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--span", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--escape-radius", dest="escape_radius", type=float)
    common.add_argument("--outdir")
    common.add_argument("--plot", action="store_const", const=True)
    scan_common = argparse.ArgumentParser(add_help=False)
    scan_common.add_argument("--a-min", dest="a_min", type=float)
    scan_common.add_argument("--a-max", dest="a_max", type=float)
    scan_common.add_argument("--count", type=int)
    scan_common.add_argument("--q-max", dest="q_max", type=int)
    scan_common.add_argument("--jobs", type=int)
    lift_common = argparse.ArgumentParser(add_help=False)
    lift_common.add_argument("--orbit-resolution", dest="orbit_resolution", type=int)
    lift_common.add_argument("--curve-resolution", dest="curve_resolution", type=int)
    lift_common.add_argument("--fiber-resolution", dest="fiber_resolution", type=int)
    lift_common.add_argument("--constant", action="store_const", const=True)
    lift_common.add_argument("--hopf", action="store_const", const=True)
    sub.add_parser("solve", parents=[common])
    sub.add_parser("scan", parents=[common, scan_common])
    sub.add_parser("closed", parents=[common, scan_common])
    sub.add_parser("lift", parents=[common, lift_common])
    verify_p = sub.add_parser("verify", parents=[common, lift_common])
    verify_p.add_argument("--perturb", type=float)
    export_p = sub.add_parser("export", parents=[common, lift_common])
    export_p.add_argument("--format", dest="fmt", choices=["csv", "obj", "ply"])
    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "scan": cmd_scan,
    "closed": cmd_closed,
    "lift": cmd_lift,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except (InvalidInput, StateError, DomainError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg)
    except PreconditionError as exc:
        if "forbidden motion constant" in str(exc):
            print(f"forbidden configuration: {exc}", file=sys.stderr)
            return EXIT_FORBIDDEN
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInput, StateError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError,) + _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
