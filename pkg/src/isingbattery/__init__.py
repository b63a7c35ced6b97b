"""Quantum-battery cycle simulator on the periodic transverse-field Ising chain."""

__version__ = "0.1.0"
