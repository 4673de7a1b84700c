"""Numerical toolkit for the orthogonal Gelfand-Zeitlin system."""

__version__ = "0.1.0"
