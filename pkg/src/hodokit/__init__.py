"""hodokit: Hamilton's velocity circle, conic orbits and hyperbolic scattering
for the Kepler problem, with a numerical integration oracle to check them."""

from .core import (
    Conserved,
    PlaneFrame,
    State,
    SystemParams,
    angular_momentum,
    conserved,
    energy,
    plane_frame,
    to_plane_coords,
    vec3,
)
from .errors import (
    DegenerateCollinear,
    DegenerateRadialMotion,
    DomainError,
    HodokitError,
    NonFinite,
    NotHyperbolic,
    NumericalError,
    OutOfPlane,
    OutsideBranch,
    SingularPosition,
    StepLimitExceeded,
)
from .hodograph import (
    ConicClass,
    ConicOrbit,
    HodographCircle,
    classify,
    conic_from_state,
    eccentricity,
    radius_at,
    sample_hodograph,
    state_at,
    velocity_at,
    velocity_circle,
)
from .oracle import (
    CircleFit,
    IntegratorConfig,
    Method,
    Trajectory,
    accelerate,
    asymptotic_direction,
    fit_circle,
    integrate,
    sweep_theta,
)
from .scattering import (
    HyperbolicScattering,
    analyze_scattering,
    arc_angle,
    arc_endpoints,
    asymptotic_directions,
    energy_circle_radius,
    hyperbola_center,
    scattering_angle_from_conserved,
    theta_limits,
)

__version__ = "0.1.0"
