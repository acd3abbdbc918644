"""Exception types shared across the toolkit."""


class CbgError(Exception):
    """Base class for all toolkit errors."""


class SpecError(CbgError, ValueError):
    """A structure or grid specification violates its invariants."""


class ConfigError(CbgError, ValueError):
    """A run configuration is malformed or inconsistent."""


class InstabilityError(CbgError, RuntimeError):
    """The time stepping diverged (Courant violation or bad map)."""


class DataError(CbgError, ValueError):
    """Input data is degenerate (zero fields, empty spectra, ...)."""


class FitError(CbgError, RuntimeError):
    """A resonance fit could not be performed on the given spectrum."""
