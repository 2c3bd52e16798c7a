"""Traveling fronts of the diffusive Rosenzweig-MacArthur system and their spectral stability."""

__version__ = "0.1.0"
