"""Exception hierarchy. Each class maps onto a CLI exit code."""


class RelHartreeError(Exception):
    exit_code = 1


class ConfigurationError(RelHartreeError, ValueError):
    """Invalid grid, parameters, config file or unknown config key."""

    exit_code = 2


class UsageError(RelHartreeError, ValueError):
    """Operation called with a field in the wrong space or on a foreign grid."""

    exit_code = 2


class BandError(ConfigurationError):
    """Dyadic scale outside the band the grid can resolve."""


class NumericError(RelHartreeError, ArithmeticError):
    exit_code = 3


class BlowUpError(NumericError):
    """Raised when the solution becomes non-finite or exceeds the sup-norm guard.

    ``partial`` carries whatever TimeSeries had been accumulated before the
    failure (``None`` when raised from a single step).
    """

    def __init__(self, message, t=None, sup_history=None, partial=None):
        super().__init__(message)
        self.t = t
        self.sup_history = list(sup_history or [])
        self.partial = partial


class FitError(NumericError):
    pass


class SizeError(RelHartreeError, MemoryError):
    exit_code = 2
