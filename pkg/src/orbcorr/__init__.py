"""Orbital correlation and entanglement analysis for small fermionic systems."""

__version__ = "0.1.0"
