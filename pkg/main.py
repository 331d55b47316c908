#!/usr/bin/env python3
"""
snb - Main Entry Point

Numerics for epsilon-neighborhoods of orbits of time-one maps near a
saddle-node bifurcation: orbits, tail lengths, scale fits, multiplicity
and box dimension.
"""

import sys

# Add src directory to Python path
sys.path.insert(0, 'src')

from snb.reports.cli import main


if __name__ == "__main__":
    sys.exit(main())
