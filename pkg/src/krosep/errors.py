"""Exception types shared across the package."""


class KrosepError(Exception):
    """Base class for all krosep errors."""


class InvalidArgument(KrosepError):
    """An argument violates a documented precondition."""


class NotPositiveSemidefinite(InvalidArgument):
    """A matrix that must be PSD has an eigenvalue below tolerance."""


class DegenerateInput(KrosepError):
    """Input is singular in a way that makes the operation meaningless."""


class UnsupportedModeCount(KrosepError):
    """An operation restricted to bipartite (K = 2) structure got K != 2."""


class MatrixFormatError(KrosepError):
    """A matrix text file could not be parsed."""
