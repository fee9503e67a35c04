"""Chebyshev race calculators for dihedral and generalized quaternion towers."""

__version__ = "0.1.0"
