"""Exception hierarchy shared across the package."""


class LVJumpsError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(LVJumpsError):
    """Invalid run parameters (bad time grid, empty sweep grid, ...)."""


class ModelFormatError(LVJumpsError):
    """Malformed model JSON: unknown fields, wrong types, missing keys."""


class DomainError(LVJumpsError):
    """A mathematical precondition is violated (e.g. a relative jump size
    reaching -1, which would annihilate the population)."""


class GridMismatchError(LVJumpsError):
    """Two path-indexed series do not live on the same merged grid."""


class IntegrationError(LVJumpsError):
    """Hard numerical failure during integration (NaN state)."""


class PrerequisiteError(LVJumpsError):
    """An analysis was requested whose analytic hypothesis does not hold,
    so the bound it would check is meaningless."""
