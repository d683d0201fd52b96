"""Exception hierarchy shared by all modules."""


class BiorthoError(Exception):
    """Base class; the CLI maps it to exit code 1."""


class ConfigError(BiorthoError, ValueError):
    """Invalid family/scaling descriptor or run configuration (CLI exit 2)."""


class DimensionError(BiorthoError, ValueError):
    pass


class SingularMatrixError(BiorthoError):
    pass


class IllConditionedError(BiorthoError):
    pass


class NotSPDError(BiorthoError):
    pass


class NoConvergenceError(BiorthoError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class OutOfRangeError(BiorthoError, IndexError):
    pass


class SingularCoefficientError(BiorthoError):
    pass


class NotConvergedError(BiorthoError):
    """A custom family's scaled coefficients did not settle to a limit."""


class ScaleOverflowError(BiorthoError, OverflowError):
    pass


class SingularIterateError(BiorthoError):
    """Ratio recursion hit a non-invertible intermediate (z near a zero)."""


class DegenerateZerosError(BiorthoError):
    """A zero cluster of size >= 3 was found; multiplicities are capped at 2."""


class SingularWeightError(BiorthoError):
    pass


class SingularStepError(BiorthoError):
    """Fixed-point step hit a non-invertible matrix."""
