"""Polarized paraxial light transport: Berry geometry, ray tracing and a split-step wave oracle."""

__version__ = "0.1.0"

UNITS = "lengths in transverse units; k dimensionless in those units; |p| = n"
