"""
Exception hierarchy shared by every kummerpearson module
"""

from typing import Optional


class KummerPearsonError(Exception):
    """Base class for all library errors"""


class PoleError(KummerPearsonError):
    """A gamma function argument hit a non-positive integer"""


class ParameterError(KummerPearsonError):
    """Parameters outside the domain an operation accepts"""


class SeriesError(KummerPearsonError):
    """Base class for failures while summing a series"""


class DivergenceError(SeriesError):
    """Degree contributions keep growing past the divergence horizon"""


class DomainError(SeriesError):
    """The series argument lies outside the working domain (d <= tr X)"""


class TableCeilingError(KummerPearsonError):
    """A zonal table above the configured degree ceiling was requested"""


class DegenerateConfigurationError(KummerPearsonError):
    """Singular leading block or rank-deficient configuration"""


class ParityError(KummerPearsonError):
    """The (N, K) pair does not give a terminating configuration density"""


class SamplerError(KummerPearsonError):
    """Random matrix sampling failed after the retry bound"""


class LandmarkFormatError(KummerPearsonError):
    """Malformed landmark CSV input"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = ""
        if path:
            location += f"{path}:"
        if line is not None:
            location += f"{line}:"
        super().__init__(f"{location} {message}" if location else message)


class EigenConvergenceError(KummerPearsonError):
    """Jacobi iteration did not reach the off-diagonal tolerance"""


class NonFiniteOutput(KummerPearsonError):
    """A result field is NaN or infinite"""
