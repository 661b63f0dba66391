"""Ising model on regular hyperbolic tilings: lattices, isoperimetry,
excess energies, sparse interfaces and finite-volume Gibbs sampling."""

__version__ = "0.1.0"
