"""Exception hierarchy shared across the package."""


class GaplabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(GaplabError, ValueError):
    """A parameter is outside its documented range or malformed."""


class DimensionMismatchError(InvalidParameterError):
    """A point's dimension does not match the class or distribution."""


class PointNotInDomainError(InvalidParameterError):
    """A point is not part of a table class's enumerated domain."""


class InconsistentSampleError(InvalidParameterError):
    """A labeled sample contradicts itself or every concept in the class."""


class OracleUnavailableError(GaplabError):
    """No exact disagreement oracle exists for the requested combination."""


class SearchBracketError(GaplabError):
    """The sample-size search hit its cap without bracketing the target."""
