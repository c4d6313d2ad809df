"""Tactile Internet architecture modeller, compliance checker and simulator."""

__version__ = "0.1.0"
