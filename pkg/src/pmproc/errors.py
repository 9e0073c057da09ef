"""Exception types raised across the package."""


class PMProcError(Exception):
    """Base class for all package errors."""


class ShapeError(PMProcError, ValueError):
    pass


class InvalidDimension(PMProcError, ValueError):
    pass


class DomainError(PMProcError, ValueError):
    pass


class InvalidPermutation(PMProcError, ValueError):
    pass


class DegenerateRetraction(PMProcError, ArithmeticError):
    pass


class SpectralDegeneracy(PMProcError, ArithmeticError):
    pass


class ConfigError(PMProcError, ValueError):
    """Invalid sweep or optimizer configuration."""


class UnknownSelector(PMProcError, ValueError):
    pass


class ResultsIOError(PMProcError, OSError):
    pass


class ParseError(PMProcError, ValueError):
    """Malformed results file."""
