#!/usr/bin/env python3
"""Noiseless attractor classification on the nine reference pump values."""

import sys

from dimerlaser.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "bifurcation",
        "--out", "runs/bifurcation",
        "--seed", "1",
    ] + sys.argv[1:]))
