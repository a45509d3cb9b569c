"""Exception hierarchy shared across the package."""


class CPEffError(Exception):
    """Base class for all package errors."""


class NormalizationError(CPEffError, ValueError):
    pass


class DegenerateMarginal(CPEffError, ValueError):
    pass


class DimensionMismatch(CPEffError, ValueError):
    pass


class MissingLabels(CPEffError, ValueError):
    pass


class MissingEpsilon(CPEffError, ValueError):
    pass


class TooFewLabels(CPEffError, ValueError):
    pass


class InsufficientNeighbors(CPEffError, ValueError):
    pass


class ConstantObject(CPEffError, ValueError):
    pass


class CapExceeded(CPEffError, ValueError):
    pass


class PreconditionViolated(CPEffError, ValueError):
    pass


class UnknownExampleId(CPEffError, KeyError):
    pass


class ParseError(CPEffError, ValueError):
    """Malformed input file; message carries the line number."""
