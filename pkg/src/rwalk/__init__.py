"""Random-walk detection in daily operational time series."""

__version__ = "0.1.0"
