"""Spectral construction and statistical verification of the renormalized
Wick-power diagrams driving the dynamic phi^4 model on the torus."""

__version__ = "0.1.0"

from .lattice import FrequencyLattice
from .fields import SpectralField

__all__ = ["FrequencyLattice", "SpectralField", "__version__"]
