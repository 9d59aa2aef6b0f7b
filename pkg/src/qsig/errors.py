"""Exception hierarchy.

Estimation failures (``EstimatorError`` and subclasses) are counted by the
Monte Carlo harness and map to CLI exit code 4; ``ConfigError`` and
``DataError`` map to exit codes 2 and 3.
"""


class QsigError(Exception):
    pass


class ConfigError(QsigError, ValueError):
    pass


class DataError(QsigError, ValueError):
    pass


class InvalidBandwidthError(ConfigError):
    pass


class InvalidLevelError(ConfigError):
    pass


class InvalidVarianceError(ConfigError):
    pass


class SampleTooSmallError(DataError):
    pass


class DegenerateSampleError(DataError):
    pass


class EstimatorError(QsigError, ArithmeticError):
    pass


class EmptyWindowError(EstimatorError):
    pass


class SingularDesignError(EstimatorError):
    pass
