"""Dynamical Lie algebra of the driven asymmetric-top J / J+1 / J+1 subsystem."""

__version__ = "0.1.0"
