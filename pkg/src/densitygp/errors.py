"""
Error hierarchy for densitygp.

Every error knows the process exit code the CLI should return and can render
itself as the small ``{"type", "message"}`` dict embedded in JSON reports.
"""

from typing import Any, Dict


class DensityGPError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'type': type(self).__name__,
            'message': str(self),
        }


# Usage errors (exit code 2)

class UsageError(DensityGPError):
    exit_code = 2


class PreconditionError(UsageError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedNu(UsageError):
    pass


class TaskMismatch(UsageError):
    pass


# Data errors (exit code 3)

class DataError(DensityGPError):
    exit_code = 3


class AllZero(DataError):
    pass


class NegativeInput(DataError):
    pass


class DegenerateSamples(DataError):
    pass


class LengthMismatch(DataError):
    pass


class InvalidLabels(DataError):
    pass


class OneClassOnly(DataError):
    """AUC is undefined; the accuracy computed before failing is kept."""

    def __init__(self, message: str, accuracy: float = float('nan')):
        super().__init__(message)
        self.accuracy = accuracy


class DatasetFileError(DataError):
    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)


# Numerical failures (exit code 4)

class NumericalError(DensityGPError):
    exit_code = 4


class NotPSD(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class LeavesHemisphere(NumericalError):
    pass


class AntipodalPair(NumericalError):
    pass


class NonPositiveParam(NumericalError):
    pass


class NonFiniteGradient(NumericalError):
    pass


class AllRejected(NumericalError):
    pass


class LineSearchFailed(NumericalError):
    """Backtracking found no decrease; ``point``/``value`` hold the last accepted iterate."""

    def __init__(self, message: str, point=None, value: float = float('nan'), n_iter: int = 0):
        super().__init__(message)
        self.point = point
        self.value = value
        self.n_iter = n_iter
