#!/usr/bin/env python3
"""Cross-correlation minimum and cycle amplitude vs system size beta^-1."""

import sys

from dimerlaser.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "beta-sweep",
        "--out", "runs/beta_sweep",
        "--seed", "1",
    ] + sys.argv[1:]))
