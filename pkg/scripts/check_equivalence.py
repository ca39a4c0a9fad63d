#!/usr/bin/env python3
"""Exhaustive formula/net equivalence sweep.

Walks every general formula up to the requested size, decides each one by
brute force, and checks that target reachability agrees for both net
constructions. Exits 1 on the first batch of mismatches.
"""

import argparse
import sys
import time

from x1scan.oracle import brute_force_sat, exhaustive_general, net_cross_check


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--m-max", type=int, default=4)
    ap.add_argument("--progress-every", type=int, default=5000, metavar="K")
    args = ap.parse_args()

    t0 = time.perf_counter()
    checked = 0
    mismatches: list[str] = []
    for n in range(1, args.n_max + 1):
        for f in exhaustive_general(n, args.m_max):
            sat = brute_force_sat(f) is not None
            for problem in net_cross_check(f, sat):
                mismatches.append(
                    f"n={n} clauses={[list(c.lits) for c in f.clauses]}: {problem}"
                )
            checked += 1
            if checked % args.progress_every == 0:
                print(f"... {checked} formulas", file=sys.stderr)

    elapsed = time.perf_counter() - t0
    print(f"checked {checked} formulas in {elapsed:.1f}s, "
          f"{len(mismatches)} mismatches")
    for line in mismatches:
        print(f"MISMATCH {line}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
