"""Exception types raised by hodokit.

Domain errors mean the input is outside the region where a quantity is
defined (radial motion, non-hyperbolic orbits, ...). Numerical errors mean
the integrator could not finish.
"""


class HodokitError(Exception):
    """Base class for all hodokit errors."""


class DomainError(HodokitError, ValueError):
    pass


class NumericalError(HodokitError, ArithmeticError):
    pass


class SingularPosition(DomainError):
    """The particle sits at (or the integrator fell onto) the force center."""


class DegenerateRadialMotion(DomainError):
    """Angular momentum vanishes, so there is no orbital plane."""


class OutOfPlane(DomainError):
    pass


class OutsideBranch(DomainError):
    """Polar angle lies outside the admissible range of the conic."""


class NotHyperbolic(DomainError):
    pass


class DegenerateCollinear(DomainError):
    """Points handed to the circle fit do not determine a circle."""


class StepLimitExceeded(NumericalError):
    pass


class NonFinite(NumericalError):
    pass
