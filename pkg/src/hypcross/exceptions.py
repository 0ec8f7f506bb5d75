"""Exception types shared across the package."""


class HypcrossError(Exception):
    """Base class for package errors."""


class ResourceCapError(HypcrossError):
    """An enumeration or grid would exceed the configured size cap."""


class AliasingError(HypcrossError, ValueError):
    """Distinct frequencies collide modulo the grid sizes."""


class InsufficientGridError(HypcrossError, ValueError):
    """A grid is too coarse for exact analysis of the requested support."""


class RankDeficientError(HypcrossError, ValueError):
    """A least-squares design matrix is (numerically) rank deficient."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class MissingSamplesError(HypcrossError, ValueError):
    """Sample values are missing at points required by a recovery operator."""


class ConfigError(HypcrossError, ValueError):
    """Invalid sweep configuration."""
