"""Delta-VQE: locate quantum critical points from two-reference HVA energies."""

__version__ = "0.1.0"
