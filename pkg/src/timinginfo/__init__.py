"""Timing information of quantum clock signals: measures, bounds, covariant channels and broadcasting."""

__version__ = "0.1.0"
