"""Density-matrix and shot-level simulator of three-qubit teleportation with single-shot readout."""

__version__ = "0.1.0"
