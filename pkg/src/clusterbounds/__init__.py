"""Verification toolkit for cluster-expansion bounds on lattice |psi|^4 models."""

__version__ = "0.1.0"
