"""Exception hierarchy shared by every module of the package."""


class SQCError(Exception):
    """Base class for all errors raised by :mod:`sqc`."""


class InvalidInputError(SQCError, ValueError):
    """Malformed vector, matrix or cone description."""


class DomainError(SQCError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UnsupportedConeError(SQCError, NotImplementedError):
    """The requested operation has no implementation for this cone variant."""


class SolverFailure(SQCError, RuntimeError):
    """A numerical routine did not converge within its iteration budget."""


class DegenerateGeodesicError(SQCError, ValueError):
    """Endpoints are antipodal (or equal), so the minimal geodesic is not unique."""


class SamplingBudgetExceeded(SQCError, RuntimeError):
    """Rejection sampling ran out of draws before collecting enough points."""


class ParseError(SQCError, ValueError):
    """Problem file could not be decoded into a valid problem."""
