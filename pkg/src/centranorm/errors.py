"""Exception types shared across the package."""


class CentranormError(Exception):
    """Base class for all centranorm errors."""


class DomainError(CentranormError, ValueError):
    """Input outside the domain of a transform (e.g. x <= 0 for Box-Cox)."""


class TransformRangeError(CentranormError, ValueError):
    """Value outside the range of a transform, so it cannot be inverted."""

    def __init__(self, message, positions=None):
        super().__init__(message)
        self.positions = [] if positions is None else list(positions)


class DegenerateDataError(CentranormError, ValueError):
    """Data carry too little signal for the requested estimate
    (zero mad, too few observations, or too little total weight)."""


class SpecificationError(CentranormError, ValueError):
    """Estimator settings incompatible with the data at fit time
    (e.g. a trimming window size outside its bounds)."""


class OptimizationError(CentranormError, RuntimeError):
    """The objective was non-finite at every point of the search grid."""


class CentranormWarning(UserWarning):
    """Warning category for recoverable issues (e.g. knot fallback)."""
