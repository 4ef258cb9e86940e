"""Exception hierarchy shared by every fabercone module."""


class FaberConeError(Exception):
    """Base class for all library errors."""


class InvalidSignature(FaberConeError, ValueError):
    """The pair (g, n) does not describe a usable moduli space."""


class NonexistentClass(FaberConeError, ValueError):
    """A boundary index was requested that has no divisor on the space."""


class GroupTooLarge(FaberConeError):
    """Permutation group closure exceeded the configured limit."""


class DimensionMismatch(FaberConeError, ValueError):
    pass


class InvalidN(FaberConeError, ValueError):
    pass


class InvalidPartition(FaberConeError, ValueError):
    pass


class CertificateError(FaberConeError):
    """A certificate failed exact re-verification."""


class ResourceLimit(FaberConeError):
    """A time or size budget was exhausted.

    ``state`` optionally carries resumable partial progress.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
