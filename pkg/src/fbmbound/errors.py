"""Exception classes shared across the package.

Each class maps to one CLI exit code (see :mod:`fbmbound.cli`).
"""


class FbmBoundError(Exception):
    """Base class for all package errors."""


class DomainError(FbmBoundError, ValueError):
    """An argument lies outside the domain of the operation."""


class EstimationError(FbmBoundError):
    """An estimator had too little usable data to produce a value."""


class NumericalError(FbmBoundError):
    """A computation produced a non-finite value or failed to converge."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class InternalError(FbmBoundError):
    """An internal consistency check failed (indicates a bug)."""


class UnsupportedDimensionError(DomainError):
    """The requested operation is only defined for low dimensions."""


class FormatError(FbmBoundError):
    """A log file or archive is malformed."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class IntegrationError(FbmBoundError):
    """The SDE integrator left the region where the drift is bounded."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class TrainingDivergence(FbmBoundError):
    """The training loss exploded."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration
