"""Exact Boson-Sampling distributions at desk scale, and the statistics around them."""

__version__ = "0.1.0"
