"""Simulation and verification tools for Hölder-space central limit theorems
of weakly dependent stationary sequences."""

__version__ = "0.1.0"
