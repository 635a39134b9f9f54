"""Spectral laboratory for the Dirac polaron fibre Hamiltonian on a truncated photon Fock space."""

__version__ = "0.1.0"
