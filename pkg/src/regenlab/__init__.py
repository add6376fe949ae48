"""Simulation and verification toolkit for discrete regenerative processes and their local times."""

__version__ = "0.1.0"
