"""snb - epsilon-neighborhoods of orbits near saddle-node bifurcations"""

__version__ = "1.0.0"
