"""Exception taxonomy shared across the package.

Configuration-type errors (bad inputs, bad files, bad names) derive from
``ConfigurationError`` so the CLI can map them to exit code 2; everything
else maps to exit code 3.
"""


class MetadecError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MetadecError, ValueError):
    """User-supplied configuration is invalid or inconsistent."""


class InvalidFunctionError(ConfigurationError):
    """Benchmark function id outside 1..24."""


class InvalidDimensionError(ConfigurationError):
    """Problem dimension below the supported minimum."""


class InvalidSplitError(ConfigurationError):
    """Seen/unseen split request names unknown function ids."""


class RegistryError(ConfigurationError):
    """Unknown components name."""


class DimensionError(MetadecError, ValueError):
    """Vector or matrix length does not match the expected shape."""


class DomainError(MetadecError, ValueError):
    """Input contains non-finite coordinates."""


class PopulationSizeError(MetadecError, ValueError):
    """Population too small for the requested operation."""


class StrategyArityError(MetadecError, ValueError):
    """Population too small for the distinct indices a mutation strategy needs."""


class InvalidControlError(MetadecError, ValueError):
    """Base-optimizer control outside its invariants (non-finite or out of range)."""


class InvalidActionError(MetadecError, ValueError):
    """Raw meta-action outside the agent's action specification."""


class EpisodeFinishedError(MetadecError, RuntimeError):
    """step() called on an environment whose episode already terminated."""


class EmptyInputError(MetadecError, ValueError):
    """Metric called on an empty collection or empty group."""


class DegenerateInputError(MetadecError, ValueError):
    """Metric denominator is zero (e.g. zero seen-group mean)."""


class IncompleteTableError(MetadecError, ValueError):
    """Performance table is missing entries a metric requires."""


class InsufficientDataError(MetadecError, ValueError):
    """Statistical test called with too few samples."""


class UnsupportedDimensionError(MetadecError, ValueError):
    """Indicator not defined for this many objectives."""


class NumericError(MetadecError, ArithmeticError):
    """Non-finite value surfaced during a numeric update."""


class ModelFormatError(MetadecError, RuntimeError):
    """Model file is unreadable or structurally malformed."""


class IncompatibleModelError(MetadecError, RuntimeError):
    """Model file has an unsupported format version or components name."""
