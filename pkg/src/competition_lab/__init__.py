"""competition-lab: simulation laboratory for two-species lattice competition,
Richardson growth, and the voter model."""

__version__ = "0.1.0"
