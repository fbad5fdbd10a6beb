"""Bivariate conditional dynamic failure extropy: measures, checks and estimators."""

__version__ = "0.1.0"
