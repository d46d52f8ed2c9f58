"""Numerical semigroup invariants and the Erdős–Rényi random semigroup model."""

__version__ = "0.1.0"
