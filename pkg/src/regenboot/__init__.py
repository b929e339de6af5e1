"""Regenerative-block inference for Harris recurrent Markov chains.

Nummelin splitting (exact and approximate), the Gaussian wild regenerative
block bootstrap, and uniform confidence bands for the stationary density of
reflected diffusions observed at low frequency, plus a seeded Monte Carlo
harness.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
