"""Numerical ground truth for the closed-form results.

Integrates ``m ẍ = −k x/|x|³`` directly, so nothing here relies on the
hodograph or conic formulas. The default method is the Dormand–Prince 5(4)
pair with PI step-size control and its 4th-order continuous extension for
output grids; a fixed-step kick-drift-kick leapfrog is available as a
symplectic cross-check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import PLANE_TOL, PlaneFrame, State, SystemParams, Vec3, energy, norm, vec3
from .errors import (
    DegenerateCollinear,
    NonFinite,
    NotHyperbolic,
    OutOfPlane,
    SingularPosition,
    StepLimitExceeded,
)


class Method(str, enum.Enum):
    RK45 = "rk45"
    LEAPFROG = "leapfrog"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``initial_step`` is the first trial step for RK45 (chosen automatically
    when ``None``) and the fixed step for leapfrog, where it is required.
    ``min_radius_guard`` defaults to ``1e-9 |x₀|``.
    """

    method: Method = Method.RK45
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float | None = None
    max_steps: int = 10_000_000
    min_radius_guard: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be > 0")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be > 0")


@dataclass(frozen=True)
class Trajectory:
    """Samples ``(t[i], x[i], v[i])`` ordered along the direction of integration."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    params: SystemParams
    config: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> State:
        return State(self.x[i], self.v[i], float(self.t[i]))

    @property
    def final(self) -> State:
        return self.state(-1)

    @property
    def r(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)


@dataclass(frozen=True)
class CircleFit:
    center: tuple[float, float]
    radius: float
    rms_residual: float


def accelerate(x, p: SystemParams) -> Vec3:
    x = np.asarray(x, dtype=float)
    r = norm(x)
    if r == 0.0:
        raise SingularPosition("acceleration undefined at the force center")
    return vec3(-p.mu * x / r**3)


# Dormand–Prince 5(4) tableau (autonomous system, so the c nodes are not needed)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th-order minus embedded 4th-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
# continuous extension (Hairer & Wanner, DOPRI5 contd5)
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075 / 11282082432,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

# PI controller constants
_SAFETY = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


def _rhs(y, mu: float, guard: float):
    x0, x1, x2, v0, v1, v2 = y
    r2 = x0 * x0 + x1 * x1 + x2 * x2
    r = math.sqrt(r2)
    if not r > guard:
        if math.isfinite(r):
            raise SingularPosition(f"collision guard tripped (r = {r:.3e} <= {guard:.3e})")
        raise NonFinite("position overflowed")
    f = -mu / (r2 * r)
    return (v0, v1, v2, f * x0, f * x1, f * x2)


def _err_norm(err, y0, y1, atol: float, rtol: float) -> float:
    acc = 0.0
    for e, a, b in zip(err, y0, y1):
        sk = atol + rtol * max(abs(a), abs(b))
        acc += (e / sk) ** 2
    return math.sqrt(acc / 6.0)


def _radius(y) -> float:
    return math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])


def _initial_step(y0, f0, mu, guard, atol, rtol, sign) -> float:
    sk = [atol + rtol * abs(a) for a in y0]
    d0 = math.sqrt(sum((a / s) ** 2 for a, s in zip(y0, sk)) / 6.0)
    d1 = math.sqrt(sum((a / s) ** 2 for a, s in zip(f0, sk)) / 6.0)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = tuple(a + sign * h0 * b for a, b in zip(y0, f0))
    f1 = _rhs(y1, mu, guard)
    d2 = math.sqrt(sum(((b - a) / s) ** 2 for a, b, s in zip(f0, f1, sk)) / 6.0) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def _dense(t0, h, y0, y1, k1, k3, k4, k5, k6, k7):
    """Coefficients of the continuous extension over ``[t0, t0 + h]``."""
    rc = []
    for i in range(6):
        ydiff = y1[i] - y0[i]
        bspl = h * k1[i] - ydiff
        rc.append((
            y0[i],
            ydiff,
            bspl,
            ydiff - h * k7[i] - bspl,
            h * (_D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i] + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i]),
        ))

    def interp(t):
        s = (t - t0) / h
        s1 = 1.0 - s
        return tuple(r0 + s * (r1 + s1 * (r2 + s * (r3 + s1 * r4))) for r0, r1, r2, r3, r4 in rc)

    return interp


def _rk45(y0, t0, t_final, mu, cfg, guard, t_eval, until_radius):
    """Yield ``(t, y)`` samples; every accepted step or only ``t_eval`` points."""
    sign = 1.0 if t_final > t0 else -1.0
    atol, rtol = cfg.abs_tol, cfg.rel_tol
    y = tuple(y0)
    t = t0
    k1 = _rhs(y, mu, guard)
    span = abs(t_final - t0)
    h = cfg.initial_step or _initial_step(y, k1, mu, guard, atol, rtol, sign)
    if math.isfinite(span):
        h = min(h, span)
    facold = 1e-4
    steps = 0
    eval_idx = 0
    reject = False
    while True:
        if math.isfinite(span) and (t_final - t) * sign <= 0:
            break
        if steps >= cfg.max_steps:
            raise StepLimitExceeded(f"exceeded {cfg.max_steps} steps at t = {t!r}")
        if h == 0.0 or h <= 1e-14 * abs(t):
            raise StepLimitExceeded(f"step size underflow at t = {t!r}")
        last = False
        if math.isfinite(span) and (t + sign * h - t_final) * sign >= 0:
            h = abs(t_final - t)
            last = True
        hs = sign * h
        k2 = _rhs(tuple(a + hs * _A21 * b for a, b in zip(y, k1)), mu, guard)
        k3 = _rhs(tuple(a + hs * (_A31 * b + _A32 * c) for a, b, c in zip(y, k1, k2)), mu, guard)
        k4 = _rhs(tuple(a + hs * (_A41 * b + _A42 * c + _A43 * d)
                        for a, b, c, d in zip(y, k1, k2, k3)), mu, guard)
        k5 = _rhs(tuple(a + hs * (_A51 * b + _A52 * c + _A53 * d + _A54 * e)
                        for a, b, c, d, e in zip(y, k1, k2, k3, k4)), mu, guard)
        k6 = _rhs(tuple(a + hs * (_A61 * b + _A62 * c + _A63 * d + _A64 * e + _A65 * f)
                        for a, b, c, d, e, f in zip(y, k1, k2, k3, k4, k5)), mu, guard)
        y_new = tuple(a + hs * (_B1 * b + _B3 * d + _B4 * e + _B5 * f + _B6 * g)
                      for a, b, d, e, f, g in zip(y, k1, k3, k4, k5, k6))
        k7 = _rhs(y_new, mu, guard)
        steps += 1
        err = tuple(hs * (_E1 * b + _E3 * d + _E4 * e + _E5 * f + _E6 * g + _E7 * q)
                    for b, d, e, f, g, q in zip(k1, k3, k4, k5, k6, k7))
        en = _err_norm(err, y, y_new, atol, rtol)
        if not math.isfinite(en):
            raise NonFinite(f"non-finite error estimate at t = {t!r}")
        fac11 = en**_EXPO1
        if en <= 1.0:
            fac = fac11 / facold**_BETA
            fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFETY))
            h_new = h / fac
            if reject:
                h_new = min(h_new, h)
            facold = max(en, 1e-4)
            t_new = t_final if last else t + hs
            if t_eval is None:
                yield t_new, y_new
            else:
                interp = None
                while eval_idx < len(t_eval) and (t_eval[eval_idx] - t_new) * sign <= 0:
                    te = t_eval[eval_idx]
                    if te == t_new:
                        yield te, y_new
                    else:
                        if interp is None:
                            interp = _dense(t, hs, y, y_new, k1, k3, k4, k5, k6, k7)
                        yield te, interp(te)
                    eval_idx += 1
            t, y, k1 = t_new, y_new, k7
            h = h_new
            reject = False
            if until_radius is not None and _radius(y) >= until_radius:
                break
            if last:
                break
        else:
            h = h / min(1.0 / _FAC_MIN, fac11 / _SAFETY)
            reject = True


def _leapfrog_segment(y, mu, guard, dt_signed, n):
    x0, x1, x2, v0, v1, v2 = y
    half = 0.5 * dt_signed
    _, _, _, a0, a1, a2 = _rhs(y, mu, guard)
    for _ in range(n):
        v0 += half * a0
        v1 += half * a1
        v2 += half * a2
        x0 += dt_signed * v0
        x1 += dt_signed * v1
        x2 += dt_signed * v2
        r2 = x0 * x0 + x1 * x1 + x2 * x2
        r = math.sqrt(r2)
        if not r > guard:
            _rhs((x0, x1, x2, v0, v1, v2), mu, guard)
        f = -mu / (r2 * r)
        a0, a1, a2 = f * x0, f * x1, f * x2
        v0 += half * a0
        v1 += half * a1
        v2 += half * a2
    return (x0, x1, x2, v0, v1, v2)


def _leapfrog(y0, t0, t_final, mu, cfg, guard, t_eval, until_radius):
    dt = cfg.initial_step
    if dt is None:
        raise ValueError("leapfrog needs a fixed step (IntegratorConfig.initial_step)")
    sign = 1.0 if t_final > t0 else -1.0
    y = tuple(y0)
    t = t0
    steps = 0
    if t_eval is None:
        if not math.isfinite(t_final):
            targets = None
        else:
            n = max(1, math.ceil(abs(t_final - t0) / dt))
            targets = [t0 + (t_final - t0) * (i + 1) / n for i in range(n)]
    else:
        targets = list(t_eval)
    i = 0
    while True:
        if targets is None:
            t_next = t + sign * dt
        elif i < len(targets):
            t_next = targets[i]
        else:
            break
        seg = t_next - t
        # slack absorbs rounding in grid differences; a stray extra step breaks symplecticity
        n = max(1, math.ceil(abs(seg) / dt - 1e-6))
        steps += n
        if steps > cfg.max_steps:
            raise StepLimitExceeded(f"exceeded {cfg.max_steps} steps at t = {t!r}")
        y = _leapfrog_segment(y, mu, guard, seg / n, n)
        if not all(math.isfinite(a) for a in y):
            raise NonFinite(f"non-finite state at t = {t_next!r}")
        t = t_next
        i += 1
        yield t, y
        if until_radius is not None and _radius(y) >= until_radius:
            break


def integrate(
    s0: State,
    p: SystemParams,
    t_final: float,
    cfg: IntegratorConfig | None = None,
    *,
    t_eval=None,
    until_radius: float | None = None,
) -> Trajectory:
    """Integrate Newton's equations from ``s0`` toward ``t_final``.

    ``t_final`` may be infinite when ``until_radius`` is given; its sign
    relative to ``s0.t`` selects forward or backward integration. With
    ``t_eval`` (monotone in the direction of integration, within the span)
    only those times are sampled; otherwise every accepted step is recorded
    after the initial state. Integration stops early once ``|x|`` reaches
    ``until_radius``.
    """
    cfg = cfg or IntegratorConfig()
    t0 = s0.t
    if math.isnan(t_final) or (math.isinf(t_final) and until_radius is None):
        raise ValueError("an infinite t_final requires until_radius")
    guard = cfg.min_radius_guard if cfg.min_radius_guard is not None else 1e-9 * s0.r
    y0 = (*map(float, s0.x), *map(float, s0.v))

    if t_eval is not None:
        t_eval = [float(te) for te in t_eval]
        sign = 1.0 if t_final >= t0 else -1.0
        for a, b in zip(t_eval, t_eval[1:]):
            if (b - a) * sign <= 0:
                raise ValueError("t_eval must be strictly monotone in the direction of integration")
        if t_eval and ((t_eval[0] - t0) * sign < 0 or (t_eval[-1] - t_final) * sign > 0):
            raise ValueError("t_eval lies outside [t0, t_final]")

    ts: list[float] = []
    ys: list[tuple] = []
    if t_eval is None or (t_eval and t_eval[0] == t0):
        ts.append(t0)
        ys.append(y0)
    if t_final != t0:
        stepper = _leapfrog if cfg.method is Method.LEAPFROG else _rk45
        pending = None
        if t_eval is not None:
            pending = [te for te in t_eval if te != t0]
        for t, y in stepper(y0, t0, t_final, p.mu, cfg, guard, pending, until_radius):
            ts.append(t)
            ys.append(y)
    arr = np.array(ys, dtype=float).reshape(-1, 6)
    if not np.all(np.isfinite(arr)):
        raise NonFinite("integration produced non-finite values")
    return Trajectory(
        t=np.array(ts, dtype=float),
        x=arr[:, :3].copy(),
        v=arr[:, 3:].copy(),
        params=p,
        config=cfg,
    )


def sweep_theta(traj: Trajectory, f: PlaneFrame) -> tuple[np.ndarray, np.ndarray]:
    """Times and unwrapped polar angles of the trajectory samples in frame ``f``."""
    r = traj.r
    off = np.abs(traj.x @ f.e3)
    if np.any(off > PLANE_TOL * r):
        worst = float(np.max(off / r))
        raise OutOfPlane(f"trajectory leaves the frame plane (|x·e3|/r up to {worst:.3e})")
    theta = np.arctan2(traj.x @ f.e2, traj.x @ f.e1)
    return traj.t.copy(), np.unwrap(theta)


def asymptotic_direction(
    s0: State,
    p: SystemParams,
    direction: str = "forward",
    radius_factor: float = 1e6,
    cfg: IntegratorConfig | None = None,
) -> Vec3:
    """Unit velocity once the particle is ``radius_factor · Λ`` from the center.

    ``direction="backward"`` runs time backward, which gives the incoming
    velocity; the returned vector is always the physical velocity direction.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    h = energy(s0, p)
    if not h > 0.0:
        raise NotHyperbolic(f"not hyperbolic (h ≤ 0, got h = {h!r}): the particle never escapes")
    j = p.m * norm(np.cross(s0.x, s0.v))
    semi_latus = j**2 / (p.m * p.k)
    target = max(radius_factor * semi_latus, s0.r)
    t_final = math.inf if direction == "forward" else -math.inf
    traj = integrate(s0, p, t_final, cfg, until_radius=target)
    v = traj.v[-1]
    return vec3(v / norm(v))


def fit_circle(points) -> CircleFit:
    """Algebraic (Kåsa) least-squares circle through 2-D points.

    Minimizes ``Σ (|p − c|² − ρ²)²``. Points are centered and scaled before
    solving, and the fit is rejected when the scaled normal matrix has a
    reciprocal condition number below 1e-12.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DegenerateCollinear("need at least 3 points in the plane")
    mean = pts.mean(axis=0)
    q = pts - mean
    scale = float(np.sqrt(np.mean(np.sum(q * q, axis=1))))
    if scale == 0.0:
        raise DegenerateCollinear("all points coincide")
    q = q / scale
    a = np.column_stack([q, np.ones(len(q))])
    ata = a.T @ a
    if 1.0 / np.linalg.cond(ata) < 1e-12:
        raise DegenerateCollinear("points are (nearly) collinear")
    rhs = a.T @ np.sum(q * q, axis=1)
    sol = np.linalg.solve(ata, rhs)
    cx, cy = sol[0] / 2.0, sol[1] / 2.0
    rho2 = sol[2] + cx * cx + cy * cy
    if not rho2 > 0:
        raise DegenerateCollinear("fit produced a non-positive radius")
    radius = math.sqrt(rho2) * scale
    center = np.array([cx, cy]) * scale + mean
    dist = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    rms = float(np.sqrt(np.mean((dist - radius) ** 2)))
    return CircleFit(center=(float(center[0]), float(center[1])), radius=radius, rms_residual=rms)
