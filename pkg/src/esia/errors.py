"""Exception hierarchy shared across the package."""


class ESIAError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ESIAError, ValueError):
    """Raised when array shapes or image sizes do not agree."""


class ScheduleError(ESIAError, ValueError):
    """Raised for an invalid drop schedule."""


class MitigationError(ESIAError):
    """Raised when a hole image cannot be filled."""


class AdapterError(ESIAError):
    """Raised when a classifier adapter fails or answers with garbage."""


class EvalError(ESIAError, ValueError):
    """Raised for invalid evaluation inputs or configuration."""


class ManifestError(ESIAError, ValueError):
    """Raised when an attack manifest is missing, corrupt or inconsistent."""
