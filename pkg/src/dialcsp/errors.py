"""Exception types shared across the package."""


class DialcspError(Exception):
    """Base class for all package errors."""


class ValidationError(DialcspError):
    """Input data failed schema or consistency validation."""


class CapError(DialcspError):
    """Solution counting was capped too early for the requested operation."""


class TransportError(DialcspError):
    """LLM endpoint could not be reached after exhausting retries."""
