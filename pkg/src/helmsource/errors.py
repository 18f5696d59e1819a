"""Exception types shared across the package."""


class HelmsourceError(Exception):
    """Base class for all package errors."""


class DomainError(HelmsourceError, ValueError):
    """Argument outside the domain of a function."""


class SingularityError(HelmsourceError, ValueError):
    """Kernel evaluated at (or numerically at) its singular point."""


class LayoutError(HelmsourceError, ValueError):
    """Parameter vector inconsistent with its layout."""


class ConfigError(HelmsourceError, ValueError):
    """Invalid experiment configuration.

    ``path`` names the offending field (dotted), when known.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalError(HelmsourceError, RuntimeError):
    """A numerical stage produced non-finite or unusable output."""
