"""Exception taxonomy shared by the whole package.

Everything raised on purpose derives from VcdError so callers (and the CLI)
can distinguish expected input/config failures from genuine bugs.
"""


class VcdError(Exception):
    """Base class for all expected failures."""


class FormatError(VcdError):
    """Unknown magic bytes, unsupported version or header field."""


class CorruptFileError(VcdError):
    """A file parsed far enough to know it is damaged (truncated payload, short record)."""


class ShapeError(VcdError):
    """Dimension, channel or sample-count mismatch between things that must agree."""


class IncompatibleWeightsError(VcdError):
    """Weight file layers do not fit the requested encoder architecture."""


class ConfigurationError(VcdError):
    """Invalid or missing knob (bad mode name, missing seed, K too large, ...)."""


class ValueRangeError(VcdError):
    """Non-finite or out-of-range numeric payload."""


class DomainError(VcdError):
    """Argument outside its documented domain (frame index, shift bound)."""
