"""Sharp Landau-Kolmogorov constants on [-1, 1] with L2 constraints."""
__version__ = "0.1.0"
