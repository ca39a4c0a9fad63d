#!/usr/bin/env python3
"""Seeded differential campaign: scan verdicts vs brute force.

Every disagreement is minimized and written to the output directory as an
X-DIMACS file plus a JSON sidecar carrying both verdicts and a reproducer
command line.
"""

import argparse
import json
import sys

from x1scan.oracle import (
    DiffParams,
    differential_run,
    report_as_dict,
    write_discrepancies,
)
from x1scan.solver import ScanOptions


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=10000)
    ap.add_argument("--n-min", type=int, default=2)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--profiles", default="mixed",
                    help="comma-separated generator profiles")
    ap.add_argument("--permutations", type=int, default=10,
                    help="random check orders tried per instance")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="discrepancies", metavar="DIR")
    ap.add_argument("--no-timing", action="store_true")
    args = ap.parse_args()

    params = DiffParams(
        count=args.count,
        n_range=(args.n_min, args.n_max),
        profiles=tuple(args.profiles.split(",")),
        seed=args.seed,
        permutations=args.permutations,
        no_timing=args.no_timing,
    )
    report = differential_run(params, opts=ScanOptions(seed=args.seed))
    written = write_discrepancies(report, args.out)

    print(json.dumps(report_as_dict(report), indent=2, sort_keys=True))
    print(f"{len(written)} discrepancy files in {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
