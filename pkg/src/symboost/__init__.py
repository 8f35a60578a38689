"""Symmetric-error fidelity boost in Beauregard Shor circuits."""

__version__ = "0.1.0"
