"""Exception types raised across the package."""


class UILabError(ValueError):
    """Base class for all argument/domain errors raised by ui_lab."""


class IndexOutOfRange(UILabError):
    pass


class InvalidTransmittivity(UILabError):
    pass


class InvalidCopyCount(UILabError):
    pass


class InvalidShotCount(UILabError):
    pass


class InvalidTotal(UILabError):
    pass


class DomainError(UILabError):
    pass


class ConfigError(UILabError):
    """Bad experiment configuration. ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
