class SpatialEpiError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(SpatialEpiError):
    """A configuration value or combination of values is invalid."""


class CalibrationError(SpatialEpiError):
    """A calibration solve could not bracket or reach its target."""
