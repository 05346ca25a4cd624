"""High-frequency event studies: estimation, identification oracles and sensitivity analysis."""

__version__ = "0.1.0"
