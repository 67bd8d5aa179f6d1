"""Exception types shared across the package."""


class CotmixError(Exception):
    """Base class for all package errors."""


class ParseError(CotmixError):
    """A data file or record could not be parsed."""


class TransportError(CotmixError):
    """An HTTP request failed after exhausting retries."""


class WireFormatError(CotmixError):
    """An endpoint responded with a body we cannot interpret."""


class CapabilityError(CotmixError):
    """An endpoint lacks a capability the operation requires."""


class JudgeParseError(CotmixError):
    """A judge response contained neither a 'True' nor a 'False' token."""


class TokenAlignmentError(CotmixError):
    """Scored tokens do not reassemble into the text that was submitted."""


class CoverageError(CotmixError):
    """Two collections that must cover the same problem ids do not."""
