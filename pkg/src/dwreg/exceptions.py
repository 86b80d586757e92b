"""Exception hierarchy shared across the package."""


class DWRegError(Exception):
    """Base class for package errors."""


class DegenerateSampleError(DWRegError, ValueError):
    """A sample carries no information about the requested parameter."""


class DataError(DWRegError, ValueError):
    """Input data could not be ingested or fails validation."""


class NumericalError(DWRegError, RuntimeError):
    """A numerical procedure failed (bad initialization, divergence)."""
