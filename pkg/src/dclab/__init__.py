"""Disk orbits and subspace-diskcyclicity checks in exact rational arithmetic."""

__version__ = "0.1.0"
