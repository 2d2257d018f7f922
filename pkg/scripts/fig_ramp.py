#!/usr/bin/env python3
"""Time-binned photon statistics along a 6 ns pump ramp (10^4 trajectories).

The full-size run takes a long while; pass --set n_traj=1000 for a quick
look.
"""

import sys

from dimerlaser.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "ramp",
        "--out", "runs/ramp",
        "--seed", "1",
    ] + sys.argv[1:]))
