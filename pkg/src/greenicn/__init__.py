"""Renewable-energy-aware gradient routing and in-network caching simulator."""

__version__ = "0.1.0"
