"""Structure-preserving Fourier-Bessel Euler solver on the unit disc with rotation-symmetry reduction."""

__version__ = "0.1.0"
