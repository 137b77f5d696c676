"""Pointer-model simulation of the von Neumann measurement in a Bell experiment."""

__version__ = "0.1.0"
