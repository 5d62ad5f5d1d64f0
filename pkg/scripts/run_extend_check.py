#!/usr/bin/env python3
"""Divergence-free extension: circulation identity and flux-balance detector."""
import math
import sys

from sector_homog.config import RunConfig
from sector_homog.experiments import run

config = {"domain": {"omega": math.pi}, "experiment": {"kind": "extend-check"}}

if __name__ == "__main__":
    print(run(RunConfig.from_dict(config), out_dir=sys.argv[1] if len(sys.argv) > 1 else None))
