#!/usr/bin/env python3
"""Unit-cell solve: correctors, flux potential, homogenized matrix, sublinearity."""
import sys

from sector_homog.config import RunConfig
from sector_homog.experiments import run

config = {
    "coeff": {"kind": "rotated-periodic", "kappa": 1.5, "rotation": 0.35,
              "epsilon": 0.05, "normalization": "auto"},
    "experiment": {"kind": "cell", "cell_grid": 256},
}

if __name__ == "__main__":
    print(run(RunConfig.from_dict(config), out_dir=sys.argv[1] if len(sys.argv) > 1 else None))
