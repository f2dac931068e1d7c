"""Exception types shared across the codec."""


class EcgzError(Exception):
    """Base class for every error this package raises on bad data."""


class TruncationError(EcgzError):
    """A bit or byte stream ended before a complete read."""


class CorruptStreamError(EcgzError):
    """A frame stream violates the format contract."""


class ReservedHeaderError(CorruptStreamError):
    """A frame uses the reserved 0010 header prefix."""


class ContainerError(EcgzError):
    """Malformed .ecgz container."""


class BadMagicError(ContainerError):
    pass


class BadVersionError(ContainerError):
    pass


class CountMismatchError(ContainerError):
    """Declared sample or frame counts disagree with the payload."""


class WfdbParseError(EcgzError):
    """Malformed WFDB header or signal file."""


class UnsupportedFormatError(WfdbParseError):
    """WFDB signal format this reader does not handle."""
