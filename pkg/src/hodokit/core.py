"""Vectors, states, conserved quantities and the orbital-plane frame.

Convention used throughout the package: the angular momentum is the true
``J = x × (m v)`` and ``j = |J|``. With it the polar angle obeys
``dθ/dt = j / (m r²)`` and the derived constants are

    R = k / j,   Λ = j² / (m k),   h = m k² (e² − 1) / (2 j²).

At ``m = 1`` these coincide with the familiar per-unit-mass forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRadialMotion, OutOfPlane, SingularPosition

Vec3 = np.ndarray

#: eccentricity below which the hodograph center is treated as the origin
EPS_DEG = 1e-12
#: half-width of the parabolic band around e = 1
EPS_CLS = 1e-9
#: relative size of j (against m|x||v|) below which motion counts as radial
RADIAL_TOL = 1e-14
#: out-of-plane tolerance for a position, relative to |x|
PLANE_TOL = 1e-9


def vec3(values) -> Vec3:
    """Return a read-only float64 copy of ``values``, checked to be a finite 3-vector."""
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected 3 components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite vector component in {arr.tolist()}")
    arr.flags.writeable = False
    return arr


def norm(a: Vec3) -> float:
    return math.hypot(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class SystemParams:
    """Particle mass ``m`` and force constant ``k`` of the potential ``-k/|x|``."""

    m: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        for name in ("m", "k"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {val!r}")
            object.__setattr__(self, name, val)

    @property
    def mu(self) -> float:
        """Acceleration scale ``k/m``."""
        return self.k / self.m


@dataclass(frozen=True)
class State:
    x: Vec3
    v: Vec3
    t: float = 0.0

    def __post_init__(self):
        x = vec3(self.x)
        if norm(x) == 0.0:
            raise SingularPosition("position coincides with the force center")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", vec3(self.v))
        t = float(self.t)
        if not math.isfinite(t):
            raise ValueError("time tag must be finite")
        object.__setattr__(self, "t", t)

    @property
    def r(self) -> float:
        return norm(self.x)

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.x, other.x) and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash((self.x.tobytes(), self.v.tobytes(), self.t))

    def rotated(self, q: np.ndarray) -> State:
        """Apply the rotation matrix ``q`` to position and velocity."""
        q = np.asarray(q, dtype=float)
        return State(q @ self.x, q @ self.v, self.t)


@dataclass(frozen=True)
class Conserved:
    J: Vec3
    j: float
    h: float


@dataclass(frozen=True)
class PlaneFrame:
    """Right-handed orthonormal triple with ``e3`` along the angular momentum.

    ``e1`` points at perihelion (or at the defining position for a circular
    orbit), so the hodograph center sits on the ``+e2`` axis.
    """

    e1: Vec3
    e2: Vec3
    e3: Vec3
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        e1, e2, e3 = vec3(self.e1), vec3(self.e2), vec3(self.e3)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "e3", e3)
        mat = np.vstack([e1, e2, e3])
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def to_frame(self, w) -> np.ndarray:
        """World coordinates -> frame coordinates."""
        return self.matrix @ np.asarray(w, dtype=float)

    def to_world(self, c) -> np.ndarray:
        """Frame coordinates -> world coordinates."""
        return self.matrix.T @ np.asarray(c, dtype=float)

    def rotated(self, q: np.ndarray) -> PlaneFrame:
        q = np.asarray(q, dtype=float)
        return PlaneFrame(q @ self.e1, q @ self.e2, q @ self.e3)


def angular_momentum(s: State, p: SystemParams) -> Vec3:
    """``x × (m v)``; the zero vector is returned for radial motion."""
    return vec3(np.cross(s.x, p.m * s.v))


def energy(s: State, p: SystemParams) -> float:
    r = s.r
    if r == 0.0:
        raise SingularPosition("energy undefined at the force center")
    v2 = float(np.dot(s.v, s.v))
    return 0.5 * p.m * v2 - p.k / r


def conserved(s: State, p: SystemParams) -> Conserved:
    J = angular_momentum(s, p)
    return Conserved(J=J, j=norm(J), h=energy(s, p))


def require_nonradial(s: State, p: SystemParams) -> Vec3:
    """Return ``J`` or raise :class:`DegenerateRadialMotion` if it vanishes."""
    J = angular_momentum(s, p)
    j = norm(J)
    if j == 0.0 or j <= RADIAL_TOL * p.m * s.r * norm(s.v):
        raise DegenerateRadialMotion("degenerate radial motion (J = 0)")
    return J


def hodograph_center(s: State, p: SystemParams) -> tuple[Vec3, float, Vec3]:
    """Center ``c``, radius ``R`` and unit normal of the velocity circle.

    ``c = v − R (ĵ × x̂)`` with ``R = k/j``; this is the single-state form of
    the integration constant in ``v(θ) = R(−sin θ, cos θ, 0) + c``.
    """
    J = require_nonradial(s, p)
    j = norm(J)
    jhat = J / j
    R = p.k / j
    xhat = s.x / s.r
    c = s.v - R * np.cross(jhat, xhat)
    # c lies in the plane analytically; strip the rounding residue along ĵ
    c = c - np.dot(c, jhat) * jhat
    return vec3(c), R, vec3(jhat)


def plane_frame(s: State, p: SystemParams) -> PlaneFrame:
    c, R, e3 = hodograph_center(s, p)
    cn = norm(c)
    if cn > EPS_DEG * R:
        e1 = np.cross(c / cn, e3)
    else:
        e1 = s.x / s.r
        e1 = e1 - np.dot(e1, e3) * e3
    e1 = e1 / norm(e1)
    e2 = np.cross(e3, e1)
    return PlaneFrame(e1, e2, e3)


def to_plane_coords(s: State, f: PlaneFrame) -> tuple[float, float, tuple[float, float]]:
    """Polar coordinates ``(r, θ)`` of the position and in-plane velocity.

    ``θ`` is the principal value in ``(−π, π]`` measured from ``e1``
    counterclockwise about ``e3``.
    """
    r = s.r
    if abs(float(np.dot(s.x, f.e3))) > PLANE_TOL * r:
        raise OutOfPlane("state does not lie in the frame's plane")
    theta = math.atan2(float(np.dot(s.x, f.e2)), float(np.dot(s.x, f.e1)))
    if theta == -math.pi:
        theta = math.pi
    return r, theta, (float(np.dot(s.v, f.e1)), float(np.dot(s.v, f.e2)))
