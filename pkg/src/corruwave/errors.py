"""Exception types raised across corruwave."""


class CorruwaveError(Exception):
    pass


class DomainError(CorruwaveError, ValueError):
    """Argument outside the domain where a formula is defined."""


class NoGuidedMode(CorruwaveError):
    pass


class WindowNotFound(CorruwaveError):
    pass


class MissingPeriod(CorruwaveError, ValueError):
    pass


class NoConvergence(CorruwaveError):
    """Newton relaxation did not reach tolerance.

    ``state`` holds the best iterate and ``residual`` its residual norm.
    """

    def __init__(self, message, state=None, residual=None):
        super().__init__(message)
        self.state = state
        self.residual = residual


class StepFailure(CorruwaveError):
    pass


class SingularBlock(CorruwaveError):
    pass


class PhysicalityError(CorruwaveError):
    pass


class DegenerateMismatch(CorruwaveError, ValueError):
    pass


class InfeasibleBranch(CorruwaveError, ValueError):
    pass


class BandGapWarning(UserWarning):
    """Linear seed lies in the exponential (band-gap) regime."""
