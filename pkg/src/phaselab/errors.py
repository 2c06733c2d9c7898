"""Exception hierarchy shared by all phaselab modules."""


class PhaseLabError(Exception):
    """Base class for every error raised by phaselab."""


class InvalidGrid(PhaseLabError, ValueError):
    pass


class InvalidField(PhaseLabError, ValueError):
    pass


class GridMismatch(PhaseLabError, ValueError):
    pass


class NonPositiveIntensity(PhaseLabError, ValueError):
    pass


class NonUniformZ(PhaseLabError, ValueError):
    pass


class TooFewSlices(PhaseLabError, ValueError):
    pass


class DimensionMismatch(PhaseLabError, ValueError):
    pass


class ZeroDiagonal(PhaseLabError, ValueError):
    pass


class InvalidParameter(PhaseLabError, ValueError):
    pass


class NotConverged(PhaseLabError, RuntimeError):
    """An iterative solve stopped before reaching its tolerance.

    The solver report is available as ``.report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonPositivePsi(PhaseLabError, RuntimeError):
    pass


class StepRejected(PhaseLabError, RuntimeError):
    pass


class BlowUp(PhaseLabError, RuntimeError):
    pass


class InterpolationOutOfDomain(PhaseLabError, ValueError):
    pass


class IndexOutOfRange(PhaseLabError, IndexError):
    pass
