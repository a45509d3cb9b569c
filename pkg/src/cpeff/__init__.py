"""Smoothed conformal prediction for classification and its efficiency criteria."""

__version__ = "0.1.0"
