"""Crowd-navigation benchmark: sampling MPC over probabilistic trajectory predictions."""

__version__ = "0.1.0"
