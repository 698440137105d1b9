"""Two-weight characteristic constants for truncated fractional Riesz
transforms on finitely atomic measures, with random dyadic grid experiments."""

__version__ = "0.1.0"
