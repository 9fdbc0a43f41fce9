"""Discretized-mode operator algebra of a 2D massless scalar field under conformal maps."""

__version__ = "0.1.0"
