"""Exception hierarchy.

Two families map onto the CLI exit codes: :class:`ValidationError` (bad
input, exit 2) and :class:`NumericalError` (a computation that could not
complete, exit 3).
"""


class ConvexOptError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(ConvexOptError, ValueError):
    pass


class NumericalError(ConvexOptError, RuntimeError):
    pass


class InvalidBody(ValidationError):
    pass


class OriginOutside(ValidationError):
    pass


class MeshTooCoarse(ValidationError):
    pass


class DegenerateChart(ValidationError):
    pass


class VolumeOutOfRange(ValidationError):
    pass


class InfeasibleInit(ValidationError):
    pass


class SolveFailed(NumericalError):
    pass


class RieszQuadratureBudgetExceeded(NumericalError):
    pass


class SamplerStalled(NumericalError):
    pass


class EvaluationFailure(NumericalError):
    pass
