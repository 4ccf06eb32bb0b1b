"""Characteristic-polynomial statistics for G2 and the finite-field L-functions
whose Frobenius classes are predicted to follow them."""

__version__ = "0.1.0"
