"""Velocity circle and conic orbit from a single state.

The velocity of a Kepler orbit traces a circle of radius ``R = k/j``
counterclockwise about ``e3`` as the polar angle grows; in the
perihelion-aligned frame

    v(θ) = (−R sin θ, R (e + cos θ), 0),    r(θ) = Λ / (1 + e cos θ).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    EPS_CLS,
    EPS_DEG,
    PlaneFrame,
    State,
    SystemParams,
    Vec3,
    conserved,
    hodograph_center,
    norm,
    plane_frame,
    vec3,
)
from .errors import OutsideBranch

#: inset from the asymptote angles used when sampling a hyperbolic arc
SAMPLE_INSET = 1e-6
#: smallest admissible value of 1 + e cos θ
BRANCH_TOL = 1e-12


class ConicClass(str, enum.Enum):
    CIRCLE = "circle"
    ELLIPSE = "ellipse"
    PARABOLA = "parabola"
    HYPERBOLA = "hyperbola"


@dataclass(frozen=True)
class HodographCircle:
    """Velocity circle, traversed counterclockwise about ``frame.e3``."""

    center: Vec3
    radius: float
    frame: PlaneFrame
    orientation: str = "positive"


@dataclass(frozen=True)
class ConicOrbit:
    e: float
    semi_latus: float
    cls: ConicClass
    frame: PlaneFrame
    params: SystemParams
    j: float
    h: float

    @property
    def is_open(self) -> bool:
        return self.cls in (ConicClass.PARABOLA, ConicClass.HYPERBOLA)


def classify(e: float) -> ConicClass:
    if e < 0:
        raise ValueError(f"eccentricity must be >= 0, got {e}")
    if e <= EPS_DEG:
        return ConicClass.CIRCLE
    if abs(e - 1.0) <= EPS_CLS:
        return ConicClass.PARABOLA
    if e < 1.0:
        return ConicClass.ELLIPSE
    return ConicClass.HYPERBOLA


def velocity_circle(s: State, p: SystemParams) -> HodographCircle:
    c, R, _ = hodograph_center(s, p)
    return HodographCircle(center=c, radius=R, frame=plane_frame(s, p))


def eccentricity(circle: HodographCircle, p: SystemParams | None = None) -> float:
    return norm(circle.center) / circle.radius


def conic_from_state(s: State, p: SystemParams) -> ConicOrbit:
    circle = velocity_circle(s, p)
    cons = conserved(s, p)
    e = eccentricity(circle, p)
    return ConicOrbit(
        e=e,
        semi_latus=cons.j**2 / (p.m * p.k),
        cls=classify(e),
        frame=circle.frame,
        params=p,
        j=cons.j,
        h=cons.h,
    )


def asymptote_angle(e: float) -> float:
    """Largest admissible ``|θ|`` on an open orbit: ``arccos(−1/e)``."""
    return math.acos(max(-1.0, -1.0 / e))


def radius_at(orbit: ConicOrbit, theta: float) -> float:
    denom = 1.0 + orbit.e * math.cos(theta)
    if denom <= BRANCH_TOL:
        raise OutsideBranch(f"theta={theta!r} is on or past the asymptote (1 + e cos θ = {denom:.3g})")
    return orbit.semi_latus / denom


def _check_branch(orbit: ConicOrbit, theta: float) -> None:
    if orbit.is_open and abs(theta) > asymptote_angle(orbit.e):
        raise OutsideBranch(f"|theta|={abs(theta)!r} exceeds the asymptote angle {asymptote_angle(orbit.e)!r}")


def velocity_at(circle: HodographCircle, orbit: ConicOrbit, theta: float) -> Vec3:
    _check_branch(orbit, theta)
    R = circle.radius
    # c + R(−sin θ, cos θ, 0) equals (−R sin θ, R(e + cos θ), 0) in a perihelion-aligned
    # frame, and stays on the circle when a near-circular orbit falls back to e1 = x̂
    tangent = orbit.frame.to_world((-math.sin(theta), math.cos(theta), 0.0))
    return vec3(circle.center + R * tangent)


def state_at(circle: HodographCircle, orbit: ConicOrbit, theta: float, t: float = 0.0) -> State:
    """State on the orbit at polar angle ``theta`` (time tag is arbitrary)."""
    r = radius_at(orbit, theta)
    x = orbit.frame.to_world((r * math.cos(theta), r * math.sin(theta), 0.0))
    return State(x, velocity_at(circle, orbit, theta), t)


def sample_hodograph(circle: HodographCircle, orbit: ConicOrbit, n: int) -> list[tuple[float, Vec3]]:
    """``n`` equally spaced polar angles over the admissible range, with velocities.

    Closed orbits use ``[0, 2π)``; open orbits use the arc between the
    asymptotes, inset by ``SAMPLE_INSET`` at both ends.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    if orbit.is_open:
        lim = asymptote_angle(orbit.e) - SAMPLE_INSET
        thetas = np.linspace(-lim, lim, n)
    else:
        thetas = 2.0 * math.pi * np.arange(n) / n
    return [(float(th), velocity_at(circle, orbit, float(th))) for th in thetas]
