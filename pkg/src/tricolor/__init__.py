"""Triangular color code simulation with flag qubits and the restriction decoder."""

__version__ = "0.1.0"
