"""Simulation and analysis toolkit for TLS-limited transmon coherence stability."""

__version__ = "0.1.0"
