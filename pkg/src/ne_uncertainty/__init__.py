"""Non-Gaussianity and entropy bounded uncertainty relations in truncated Fock space."""

__version__ = "0.1.0"
