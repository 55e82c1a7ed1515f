"""Selmer-stable abelian and ell-group extensions over Q: computational toolkit."""

__version__ = "0.1.0"
