"""Exception types for the adapter; the CLI maps each to an exit code."""


class AdapterError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AdapterError):
    """Invalid extraction settings (unknown model, bad batch size, ...)."""


class InputError(AdapterError):
    """The image directory is missing, unreadable, or not a directory."""


class EmptyInputError(AdapterError):
    """No file in the directory could be decoded as an image."""


class WeightsError(AdapterError):
    """Pretrained weights were requested but could not be obtained."""
