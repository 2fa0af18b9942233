"""phaselab: numerical laboratory for symplectic contraction semigroups,
truncated-Fock quantization, and phase-space path integrals."""

__version__ = "0.1.0"
