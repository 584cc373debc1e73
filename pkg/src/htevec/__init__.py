"""Eigenvector overlap processes of heavy-tailed symmetric random matrices."""

__version__ = "0.1.0"
