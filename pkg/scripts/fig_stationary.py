#!/usr/bin/env python3
"""Order-parameter moments and correlations vs pump for both system sizes.

Runs the mesoscopic (beta = 0.017) and macroscopic (beta = 1.7e-5) sweeps
into runs/stationary; takes tens of minutes at the default resolution.
"""

import sys

from dimerlaser.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "stationary",
        "--out", "runs/stationary",
        "--seed", "1",
        "--set", "beta_list=0.017,1.7e-5",
        "--set", "n_traj=100",
    ] + sys.argv[1:]))
