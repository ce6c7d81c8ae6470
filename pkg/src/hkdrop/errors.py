"""Exception hierarchy shared by every module of the package."""


class HKDropError(Exception):
    """Base class for all package errors."""


class InvalidCap(HKDropError, ValueError):
    pass


class ThetaDegenerate(HKDropError, ValueError):
    """Contact angle equals pi/2, where the cone volume and gamma degenerate."""


class DegenerateProfile(HKDropError, ValueError):
    pass


class NonPositiveCurvature(HKDropError, ValueError):
    pass


class MixedRegime(HKDropError, ValueError):
    """Contact-angle range touches or straddles pi/2."""


class RegimeMissing(HKDropError, ValueError):
    pass


class RegimeViolation(HKDropError, ValueError):
    pass


class H2Violation(HKDropError, ValueError):
    pass


class NotClosed(HKDropError, ValueError):
    pass


class EmptyTestRegion(HKDropError, ValueError):
    pass


class MeshFailure(HKDropError, RuntimeError):
    pass


class SolveDiverged(HKDropError, RuntimeError):
    pass


class NoSubstrateHit(HKDropError, RuntimeError):
    pass


class ApexSingularity(HKDropError, RuntimeError):
    pass


class RootFindDiverged(HKDropError, RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class InvalidSigma(HKDropError, ValueError):
    pass
