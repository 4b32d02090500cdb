"""Periodic one-dimensional Navier-Stokes-Korteweg simulation and coercivity analysis."""

__version__ = "0.1.0"
