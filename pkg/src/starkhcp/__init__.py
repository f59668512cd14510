"""Cesium Stark wave packets probed by a weak half-cycle pulse."""

__version__ = "0.1.0"
