"""Exact computations in modular affine vertex algebras at the critical level."""

__version__ = "0.1.0"
