"""Exception and warning classes shared across the package."""


class PhaseconeError(Exception):
    """Base class for all errors raised by phasecone."""


class InvalidDimension(PhaseconeError, ValueError):
    pass


class DimensionMismatch(PhaseconeError, ValueError):
    pass


class GridMismatch(PhaseconeError, ValueError):
    pass


class GridTooCoarse(PhaseconeError, ValueError):
    """Grid spacing violates the aliasing bound h <= pi / L."""


class OutOfGrid(PhaseconeError, ValueError):
    pass


class NotHermitian(PhaseconeError, ValueError):
    pass


class TruncationError(PhaseconeError, ValueError):
    pass


class CertificationError(PhaseconeError, ValueError):
    pass


class BadCovariance(PhaseconeError, ValueError):
    pass


class NegativeTime(PhaseconeError, ValueError):
    pass


class DecayWarning(UserWarning):
    """A sampled field has not decayed at the grid boundary."""


class TruncationWarning(UserWarning):
    """A Fock-space quantity is being evaluated close to the truncation edge."""
