"""Exception types shared across the package."""


class OrbmError(Exception):
    """Base class for all package errors."""


class InvalidInput(OrbmError):
    pass


class ConfigError(OrbmError):
    pass


class DegenerateAngle(OrbmError):
    """Mean reflection angle is at (or numerically at) +/- pi/2, where the
    rotation number tan(theta(0)) blows up.  Purely tangential dynamics are
    handled by the excursion module instead."""


class NotInT(OrbmError):
    """Angle field is identically +pi/2 or -pi/2 and admits no reflected
    process of the non-degenerate kind."""


class NotInR(OrbmError):
    """Harmonic function is not an admissible rotation field: its conjugate
    drops to -1 or below inside the disk."""


class BranchPointAtBoundary(OrbmError):
    """The analytic function h + i*htilde - i*mu0/pi vanished (or left the
    right half-plane) at a boundary evaluation point, so the principal-branch
    argument is not usable there."""

    def __init__(self, msg, angle=None):
        super().__init__(msg)
        self.angle = angle


class InternalConsistencyFailure(OrbmError):
    """A mathematically guaranteed identity failed beyond tolerance."""


class InvalidMobius(OrbmError):
    pass


class ArcTooShort(OrbmError):
    pass


class ArcNotTangential(OrbmError):
    pass


class UseErbmModule(OrbmError):
    """Reflection angles reach +/- pi/2; the Euler scheme does not apply."""


class InvalidStep(OrbmError):
    pass


class PointOnPath(OrbmError):
    pass


class InvalidScales(OrbmError):
    pass


class InvalidMeasure(OrbmError):
    pass


class ViolatesLipschitzCondition(OrbmError):
    pass


class NearSingularFlow(OrbmError):
    pass


class MapDomainError(OrbmError):
    pass


class DegenerateClock(OrbmError):
    pass


class InvalidBoundary(OrbmError):
    pass
