"""Command-line interface.

Exit codes: 0 ok, 1 verification failure, 2 domain error, 3 usage error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import State, SystemParams, conserved, plane_frame, require_nonradial
from .errors import DomainError, NumericalError
from .hodograph import ConicClass, conic_from_state, sample_hodograph, velocity_circle
from .oracle import IntegratorConfig, asymptotic_direction, integrate, sweep_theta
from .report import build_report
from .scattering import (
    arc_angle,
    arc_endpoints,
    ccw_angle,
    energy_circle_radius,
    scattering_angle_from_conserved,
    theta_limits,
)
from .verify import parallel_map, run_suite, state_from_conserved, summary

EXIT_OK, EXIT_VERIFY, EXIT_DOMAIN, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3, 4

PROPAGATE_COLUMNS = ("t", "x", "y", "z", "vx", "vy", "vz", "r", "theta", "j", "h")
BATCH_COLUMNS = ("h", "j", "e", "Theta_formula", "Theta_numeric", "abs_err", "status")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _csv(rows, header) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.buffer.write(text.encode("utf-8"))
        sys.stdout.flush()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def parse_vec(text: str) -> tuple[float, float, float]:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 3:
        raise UsageError(f"expected a comma-separated triple, got {text!r}")
    try:
        vals = tuple(float(t) for t in parts)
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"non-finite vector component in {text!r}")
    return vals


def parse_grid(text: str) -> list[float]:
    """``start:stop:n`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(start), float(stop), n)]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r} (use start:stop:n or v1,v2,...)") from None


def _params(args) -> SystemParams:
    return SystemParams(args.m, args.k)


def _state(args) -> State:
    if args.x is None or args.v is None:
        raise UsageError("--x and --v are required")
    return State(parse_vec(args.x), parse_vec(args.v), args.t0)


def _cfg(args) -> IntegratorConfig:
    return IntegratorConfig(
        method=args.method,
        rel_tol=args.rtol,
        abs_tol=args.atol,
        initial_step=args.dt,
        max_steps=args.max_steps,
    )


def cmd_analyze(args) -> int:
    report = build_report(_state(args), _params(args), degrees=args.degrees)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def _propagate_rows(traj, p, s0):
    _, theta = sweep_theta(traj, plane_frame(s0, p))
    r = traj.r
    J = p.m * np.cross(traj.x, traj.v)
    j = np.linalg.norm(J, axis=1)
    h = 0.5 * p.m * np.sum(traj.v**2, axis=1) - p.k / r
    for i in range(len(traj)):
        yield (traj.t[i], *traj.x[i], *traj.v[i], r[i], theta[i], j[i], h[i])


def cmd_propagate(args) -> int:
    p = _params(args)
    s0 = _state(args)
    plane_frame(s0, p)  # rejects radial motion before any integration
    cfg = _cfg(args)
    if args.t_final is None and args.until_radius is None:
        raise UsageError("one of --t-final or --until-radius is required")
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be >= 1")
    t_final = args.t_final
    if t_final is None:
        t_final = -math.inf if args.backward else math.inf
    try:
        if args.samples is None:
            traj = integrate(s0, p, t_final, cfg, until_radius=args.until_radius)
        else:
            if args.until_radius is not None:
                t_final = integrate(s0, p, t_final, cfg, until_radius=args.until_radius).t[-1]
            grid = np.linspace(s0.t, t_final, args.samples) if args.samples > 1 else np.array([s0.t])
            traj = integrate(s0, p, float(t_final), cfg, t_eval=grid)
    except DomainError as exc:
        # a collision during integration is a numerical failure, not bad input
        raise NumericalError(str(exc)) from exc
    _emit(_csv(_propagate_rows(traj, p, s0), PROPAGATE_COLUMNS), args.out)
    return EXIT_OK


def cmd_hodograph(args) -> int:
    p = _params(args)
    s = _state(args)
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    circle = velocity_circle(s, p)
    orbit = conic_from_state(s, p)
    f = orbit.frame
    rows = []
    for th, v in sample_hodograph(circle, orbit, args.samples):
        vl = f.to_frame(v)
        rows.append((math.degrees(th) if args.degrees else th, vl[0], vl[1]))
    c_local = f.to_frame(circle.center)
    side = {
        "frame": {"e1": f.e1.tolist(), "e2": f.e2.tolist(), "e3": f.e3.tolist()},
        "center": [float(c_local[0]), float(c_local[1])],
        "center_world": circle.center.tolist(),
        "R": circle.radius,
        "e": orbit.e,
        "class": orbit.cls.value,
        "energy_radius": energy_circle_radius(orbit.h, p) if orbit.h > 0 else None,
        "arc_endpoints": None,
        "angle_unit": "deg" if args.degrees else "rad",
    }
    if orbit.cls is ConicClass.HYPERBOLA:
        v_in, v_out = arc_endpoints(circle, orbit)
        side["arc_endpoints"] = {
            "v_in": [float(c) for c in f.to_frame(v_in)[:2]],
            "v_out": [float(c) for c in f.to_frame(v_out)[:2]],
        }
    _emit(_csv(rows, ("theta", "vx", "vy")), args.out)
    sidecar = args.sidecar or (str(Path(args.out).with_suffix(".json")) if args.out else None)
    if sidecar:
        Path(sidecar).write_bytes(_json(side).encode("utf-8"))
    return EXIT_OK


def _scatter_angles(h: float, j: float, p: SystemParams) -> dict:
    psi = scattering_angle_from_conserved(h, j, p)
    e = math.sqrt(1.0 + 2.0 * h * j * j / (p.m * p.k * p.k))
    theta_star, theta_0 = theta_limits(e)
    theta = arc_angle(e)
    return {
        "theta_star": theta_star,
        "theta_0": theta_0,
        "Theta": theta,
        "Psi": psi,
        "deflection": theta - math.pi,
    }


def cmd_scatter(args) -> int:
    p = _params(args)
    if args.x is not None or args.v is not None:
        if args.h is not None or args.j is not None:
            raise UsageError("give either --h/--j or --x/--v, not both")
        s = _state(args)
        require_nonradial(s, p)
        c = conserved(s, p)
        h, j = c.h, c.j
    else:
        if args.h is None or args.j is None:
            raise UsageError("scatter needs --h and --j (or --x and --v)")
        h, j = args.h, args.j
    out = _scatter_angles(h, j, p)
    if args.degrees:
        out = {k: math.degrees(v) for k, v in out.items()}
    _emit(_json(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(seed=args.seed, cases=args.cases, tol=args.tol)
    summ = summary(results)
    if args.json:
        text = _json(summ)
    else:
        lines = [r.line() for r in results]
        lines.append(f"{summ['passed']} passed, {summ['failed']} failed")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if summ["failed"] == 0 else EXIT_VERIFY


def _batch_cell(args) -> tuple:
    h, j, m, k, radius_factor = args
    p = SystemParams(m, k)
    if not j > 0:
        return (h, j, math.nan, math.nan, math.nan, math.nan, "degenerate")
    e2 = 1.0 + 2.0 * h * j * j / (m * k * k)
    e = math.sqrt(e2) if e2 >= 0 else math.nan
    try:
        theta_formula = _scatter_angles(h, j, p)["Theta"]
    except DomainError:
        return (h, j, e, math.nan, math.nan, math.nan, "not-hyperbolic")
    try:
        s = state_from_conserved(h, j, p)
        fwd = asymptotic_direction(s, p, "forward", radius_factor)
        bwd = asymptotic_direction(s, p, "backward", radius_factor)
    except (NumericalError, DomainError):
        return (h, j, e, theta_formula, math.nan, math.nan, "numerical-failure")
    theta_numeric = ccw_angle(-bwd, fwd, (0.0, 0.0, 1.0))
    return (h, j, e, theta_formula, theta_numeric, abs(theta_numeric - theta_formula), "ok")


def cmd_batch_scatter(args) -> int:
    hs = parse_grid(args.h_grid)
    js = parse_grid(args.j_grid)
    cells = [(h, j, args.m, args.k, args.radius_factor) for h in hs for j in js]
    _params(args)  # reject bad m, k before fanning out
    rows = parallel_map(_batch_cell, cells)
    if args.degrees:
        rows = [(*r[:3], *(math.degrees(v) for v in r[3:6]), r[6]) for r in rows]
    _emit(_csv(rows, BATCH_COLUMNS), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hodokit", description="Kepler hodograph, conic orbit and scattering toolkit.")
    parser.add_argument("--version", action="version", version=f"hodokit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, state=True):
        sp.add_argument("--m", type=float, default=1.0, help="particle mass (default 1)")
        sp.add_argument("--k", type=float, default=1.0, help="force constant (default 1)")
        if state:
            sp.add_argument("--x", help="position x,y,z")
            sp.add_argument("--v", help="velocity vx,vy,vz")
            sp.add_argument("--t0", type=float, default=0.0, help="time tag of the state")
        sp.add_argument("--out", help="write to this file instead of stdout")

    def integrator(sp):
        sp.add_argument("--method", choices=["rk45", "leapfrog"], default="rk45")
        sp.add_argument("--rtol", type=float, default=1e-10)
        sp.add_argument("--atol", type=float, default=1e-12)
        sp.add_argument("--dt", type=float, default=None, help="initial (rk45) or fixed (leapfrog) step")
        sp.add_argument("--max-steps", type=int, default=10_000_000)

    sp = sub.add_parser("analyze", help="full report for one state (JSON)")
    common(sp)
    sp.add_argument("--degrees", action="store_true", help="emit angles in degrees")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("propagate", help="integrate the equations of motion (CSV)")
    common(sp)
    integrator(sp)
    sp.add_argument("--t-final", type=float)
    sp.add_argument("--until-radius", type=float)
    sp.add_argument("--backward", action="store_true", help="with --until-radius only: run time backward")
    sp.add_argument("--samples", type=int, help="evenly spaced output times (default: every step)")
    sp.set_defaults(func=cmd_propagate)

    sp = sub.add_parser("hodograph", help="velocity-circle samples (CSV) plus JSON sidecar")
    common(sp)
    sp.add_argument("--samples", type=int, default=720)
    sp.add_argument("--sidecar", help="sidecar path (default: --out with .json suffix)")
    sp.add_argument("--degrees", action="store_true")
    sp.set_defaults(func=cmd_hodograph)

    sp = sub.add_parser("scatter", help="arc and scattering angles (JSON)")
    common(sp)
    sp.add_argument("--h", type=float, help="energy")
    sp.add_argument("--j", type=float, help="angular momentum magnitude |J|")
    sp.add_argument("--degrees", action="store_true")
    sp.set_defaults(func=cmd_scatter)

    sp = sub.add_parser("verify", help="closed form vs integration oracle property suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=20)
    sp.add_argument("--tol", type=float, help="override every check's tolerance")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("batch-scatter", help="formula vs numeric arc angle over an (h, j) grid (CSV)")
    common(sp, state=False)
    sp.add_argument("--h-grid", required=True, help="start:stop:n or v1,v2,...")
    sp.add_argument("--j-grid", required=True, help="start:stop:n or v1,v2,...")
    sp.add_argument("--radius-factor", type=float, default=1e6)
    sp.add_argument("--degrees", action="store_true")
    sp.set_defaults(func=cmd_batch_scatter)
    return parser


_NEGATIVE_VALUE = re.compile(r"^-[0-9.]")


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--x -1,0,0`` into ``--x=-1,0,0``; argparse reads the bare form as an option."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hodokit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"hodokit {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"hodokit {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"hodokit {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
