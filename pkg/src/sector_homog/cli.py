"""Command line entry point: sector-homog <experiment> --config <file>."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import EXPERIMENT_KINDS, RunConfig
from .errors import SectorHomogError
from .experiments import run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sector-homog",
        description="Finite-element homogenization experiments on sectoral domains")
    p.add_argument("experiment", choices=EXPERIMENT_KINDS)
    p.add_argument("--config", required=False, help="JSON config file (defaults apply otherwise)")
    p.add_argument("--out", default=None, help="output directory (default: config output.dir)")
    p.add_argument("--threads", type=int, default=None,
                   help="parallel workers for epsilon sweeps "
                        "(fallback: SECTOR_HOMOG_THREADS)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = RunConfig.from_file(args.config, experiment_kind=args.experiment)
        else:
            cfg = RunConfig.from_dict({}, experiment_kind=args.experiment)
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("SECTOR_HOMOG_THREADS", "0")) or None
        if threads is not None:
            cfg.raw["threads"] = threads
        out = run(cfg, out_dir=args.out)
    except SectorHomogError as exc:
        print(json.dumps({"status": "error", "kind": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps({"status": "ok", "output_dir": out}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
