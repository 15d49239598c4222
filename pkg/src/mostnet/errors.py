"""Exceptions raised across the package."""


class MostNetError(Exception):
    """Base class for all errors raised by mostnet."""

    pass


class ShapeMismatchError(MostNetError, ValueError):
    """Raise this exception if tensor shapes are incompatible for an operation."""

    pass


class GradientError(MostNetError):
    """Raise this exception if gradients cannot be computed or are not finite."""

    pass


class MemoryDictionaryError(MostNetError, ValueError):
    """Raise this exception if the memory dictionary is used inconsistently."""

    pass


class ImageCodecError(MostNetError):
    """Raise this exception if an image cannot be encoded or decoded."""

    pass


class DatasetError(MostNetError):
    """Raise this exception if a paired dataset cannot be assembled."""

    pass


class CheckpointError(MostNetError):
    """Raise this exception if a checkpoint cannot be written or restored."""

    pass


class ReportError(MostNetError):
    """Raise this exception if a metric table cannot be written or read."""

    pass


class ConfigError(MostNetError, ValueError):
    """Raise this exception if a configuration value is out of range."""

    pass


class NonFiniteLossError(MostNetError):
    """Raise this exception if a loss component becomes NaN or infinite."""

    def __init__(self: "NonFiniteLossError", component: str, value: float) -> None:
        super().__init__(f"Loss component '{component}' is not finite: {value}")
        self.component = component
        self.value = value
