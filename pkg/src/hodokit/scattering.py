"""Velocity arc and scattering angle of hyperbolic Kepler motion.

On a hyperbola (e > 1) the polar angle is confined to ``|θ| < θ₀`` with
``θ₀ = π − θ*`` and ``θ* = arccos(1/e)``. The velocity runs over the arc of
the velocity circle between ``v(−θ₀)`` and ``v(θ₀)``, both on the energy
circle ``|v| = √(2h/m)``. The arc subtends ``Θ = 2(π − θ*)`` at the circle's
center, which equals the scattering angle ``Ψ`` between the asymptotes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EPS_CLS, State, SystemParams, Vec3, norm, vec3
from .errors import DegenerateRadialMotion, NotHyperbolic
from .hodograph import (
    ConicClass,
    ConicOrbit,
    HodographCircle,
    conic_from_state,
    velocity_at,
    velocity_circle,
)


@dataclass(frozen=True)
class HyperbolicScattering:
    theta_star: float
    theta_0: float
    Theta: float
    Psi: float
    v_out: Vec3
    v_in: Vec3
    d_out: Vec3
    d_in: Vec3
    energy_radius: float
    hyperbola_center: Vec3
    deflection: float


def _require_hyperbolic_e(e: float) -> None:
    if not e > 1.0 + EPS_CLS:
        raise NotHyperbolic(f"not hyperbolic (e ≤ 1 + {EPS_CLS:g}, got e = {e!r})")


def _require_hyperbolic(orbit: ConicOrbit) -> None:
    if orbit.cls is not ConicClass.HYPERBOLA:
        raise NotHyperbolic(f"not hyperbolic ({orbit.cls.value} orbit, e = {orbit.e!r})")


def theta_limits(e: float) -> tuple[float, float]:
    """Return ``(θ*, θ₀)`` for eccentricity ``e > 1``."""
    _require_hyperbolic_e(e)
    theta_star = math.acos(1.0 / e)
    return theta_star, math.pi - theta_star


def arc_angle(e: float) -> float:
    theta_star, _ = theta_limits(e)
    return 2.0 * (math.pi - theta_star)


def scattering_angle_from_conserved(h: float, j: float, p: SystemParams) -> float:
    """Scattering angle from energy and angular momentum alone.

    ``Ψ = 2(π − arctan((j/k) √(2h/m)))``, using ``e² − 1 = 2 h j² / (m k²)``.
    """
    if not h > 0.0:
        raise NotHyperbolic(f"not hyperbolic (h ≤ 0, got h = {h!r})")
    if not j > 0.0:
        raise DegenerateRadialMotion("degenerate radial motion (J = 0)")
    return 2.0 * (math.pi - math.atan((j / p.k) * math.sqrt(2.0 * h / p.m)))


def energy_circle_radius(h: float, p: SystemParams) -> float:
    if not h > 0.0:
        raise NotHyperbolic(f"not hyperbolic (h ≤ 0, got h = {h!r})")
    return math.sqrt(2.0 * h / p.m)


def arc_endpoints(circle: HodographCircle, orbit: ConicOrbit) -> tuple[Vec3, Vec3]:
    """Return ``(v_in, v_out) = (v(−θ₀), v(θ₀))`` in world coordinates."""
    _require_hyperbolic(orbit)
    _, theta_0 = theta_limits(orbit.e)
    return velocity_at(circle, orbit, -theta_0), velocity_at(circle, orbit, theta_0)


def asymptotic_directions(orbit: ConicOrbit) -> tuple[Vec3, Vec3]:
    """Return unit ``(d_in, d_out)``: position directions along the two asymptotes."""
    _require_hyperbolic(orbit)
    theta_star, _ = theta_limits(orbit.e)
    cs, sn = math.cos(theta_star), math.sin(theta_star)
    f = orbit.frame
    return vec3(f.to_world((-cs, -sn, 0.0))), vec3(f.to_world((-cs, sn, 0.0)))


def hyperbola_center(orbit: ConicOrbit) -> Vec3:
    """Center ``C = (a e, 0, 0)`` in the orbit frame with ``a = Λ/(e² − 1)``."""
    _require_hyperbolic(orbit)
    a = orbit.semi_latus / (orbit.e**2 - 1.0)
    return vec3(orbit.frame.to_world((a * orbit.e, 0.0, 0.0)))


def ccw_angle(a, b, normal) -> float:
    """Counterclockwise angle in ``[0, 2π)`` about ``normal`` taking ``a`` onto ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = np.asarray(normal, dtype=float)
    n = n / norm(n)
    ang = math.atan2(float(np.dot(np.cross(a, b), n)), float(np.dot(a, b)))
    return ang % (2.0 * math.pi)


def analyze_scattering(s: State, p: SystemParams) -> HyperbolicScattering:
    circle = velocity_circle(s, p)
    orbit = conic_from_state(s, p)
    _require_hyperbolic(orbit)
    theta_star, theta_0 = theta_limits(orbit.e)
    Theta = 2.0 * (math.pi - theta_star)
    v_in, v_out = arc_endpoints(circle, orbit)
    d_in, d_out = asymptotic_directions(orbit)
    return HyperbolicScattering(
        theta_star=theta_star,
        theta_0=theta_0,
        Theta=Theta,
        # half the scattering angle is the outgoing asymptote angle θ₀
        Psi=2.0 * theta_0,
        v_out=v_out,
        v_in=v_in,
        d_out=d_out,
        d_in=d_in,
        energy_radius=energy_circle_radius(orbit.h, p),
        hyperbola_center=hyperbola_center(orbit),
        deflection=Theta - math.pi,
    )
