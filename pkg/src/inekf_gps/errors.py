"""Exception types shared across the package."""


class ConfigError(ValueError):
    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class NonMonotonicTime(ValueError):
    """Propagation asked to step by a non-positive interval."""


class GapTooLarge(ValueError):
    """IMU interval exceeds the configured bound (dropped samples)."""


class SingularInnovation(ArithmeticError):
    """Innovation covariance is numerically singular."""


class OriginUnset(RuntimeError):
    """ENU conversion requested before the tangent-plane origin was anchored."""


class NoOverlap(ValueError):
    """Estimate and reference tracks share no time span."""


class FilterDivergence(ArithmeticError):
    """The state became non-finite."""


class SchemaError(ValueError):
    """Input file does not follow its CSV schema."""

    def __init__(self, path, row, reason):
        super().__init__(f"{path}: row {row}: {reason}")
        self.path = path
        self.row = row
        self.reason = reason
