#!/usr/bin/env python3
"""Excess decay of an a-harmonic function against corrected sector modes."""
import math
import sys

from sector_homog.config import RunConfig
from sector_homog.experiments import run

config = {
    "domain": {"omega": 1.95 * math.pi},
    "coeff": {"kind": "rotated-periodic", "normalization": "auto"},
    "experiment": {"kind": "excess-decay", "epsilons": [0.05], "n_modes": 0},
    "solver": {"preconditioner": "amg"},
    "seed": 7,
}

if __name__ == "__main__":
    print(run(RunConfig.from_dict(config), out_dir=sys.argv[1] if len(sys.argv) > 1 else None))
