"""Canonical charts, secular theory and Birkhoff invariants of the planetary
three-body problem in the outer retrograde configuration."""
from .kepler import CartesianState, MassConfig
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["CartesianState", "MassConfig", "BACKEND", "__version__"]
