"""Exact checks of the Gaussian product inequality for multinomial covariances."""

__version__ = "0.0.1"
