"""Exception types raised by magnuskit."""


class MagnusError(ValueError):
    """Base class. ``code`` is a short stable identifier for the failure."""

    code = "magnus-error"

    def __init__(self, message=None):
        super().__init__(message or self.code)


class DimensionError(MagnusError):
    code = "dimension-mismatch"


class StructureError(MagnusError):
    code = "structure-violation"


class SingularSystemError(MagnusError):
    code = "singular-system"


class PadeDenominatorSingular(SingularSystemError):
    code = "pade-denominator-singular"


class OrderNotSupported(MagnusError):
    code = "order-not-supported"


class OrderIndeterminate(MagnusError):
    code = "order-indeterminate"


class NoOracleError(MagnusError):
    code = "no-oracle"


class ConfigError(MagnusError):
    code = "config-error"


class FlatMismatchError(MagnusError):
    code = "flat-mismatch"


class NotConvergedError(MagnusError):
    """Newton iteration ran out of iterations; ``last`` holds the final iterate."""

    code = "not-converged"

    def __init__(self, message=None, last=None):
        super().__init__(message)
        self.last = last
