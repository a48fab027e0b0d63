"""Exception hierarchy shared by every module."""


class GDPMechError(Exception):
    """Base class for all library errors."""


class DomainError(GDPMechError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(GDPMechError, ArithmeticError):
    """An iterative or series computation did not converge."""


class CalibrationError(GDPMechError, RuntimeError):
    """Noise calibration failed an internal consistency check."""


class ConfigurationError(GDPMechError, ValueError):
    """A mechanism or test is configured inconsistently."""


class DataError(GDPMechError, ValueError):
    """Input data is malformed or non-finite."""


class SingularityError(GDPMechError, ArithmeticError):
    """A shrinkage factor is undefined because its denominator vanishes."""
