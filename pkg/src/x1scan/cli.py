"""Command-line surface: solve | oracle | net | diff | bench.

Exit codes follow SAT-solver convention: 10 satisfiable, 20 unsatisfiable,
30 claimed-but-unverified, 1 usage or parse error, 2 internal/budget error.
Flags beat environment variables (X1SCAN_SEED, X1SCAN_BUDGET) beat defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from math import log
from pathlib import Path

from .formula import (
    ConversionUnsat,
    Formula,
    ParseError,
    classify,
    conjoin_forced,
    convert_special,
    parse_x1cnf,
)
from .oracle import (
    BRUTE_VAR_LIMIT,
    DiffParams,
    OracleBudgetError,
    brute_force_sat,
    differential_run,
    generate_random,
    report_as_dict,
    write_discrepancies,
)
from .petri import (
    DEFAULT_STATE_BUDGET,
    ReachabilityBudgetError,
    build_forward_net,
    build_inverse_net,
    export_dot,
    net_as_dict,
    root_conflicts,
    target_reachable,
)
from .solver import ScanOptions, ScanResourceError, scan, verdict_as_dict

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNVERIFIED = 30
EXIT_USAGE = 1
EXIT_INTERNAL = 2

_STATUS_EXIT = {"sat": EXIT_SAT, "unsat": EXIT_UNSAT, "claimed_sat_unverified": EXIT_UNVERIFIED}
_STATUS_LINE = {
    "sat": "s SATISFIABLE",
    "unsat": "s UNSATISFIABLE",
    "claimed_sat_unverified": "s CLAIMED-SAT-UNVERIFIED",
}


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"environment variable {name} must be an integer, got {raw!r}")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = _env_int("X1SCAN_SEED")
    return env if env is not None else 0


def _resolve_budget(args) -> int:
    if args.budget_states is not None:
        return args.budget_states
    env = _env_int("X1SCAN_BUDGET")
    return env if env is not None else DEFAULT_STATE_BUDGET


def _scan_options(args) -> ScanOptions:
    return ScanOptions(
        order=args.order,
        seed=_resolve_seed(args),
        parallel=args.parallel,
        trace_checks=args.trace,
    )


def _load_formula(path: str) -> Formula:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_x1cnf(text)


def _value_line(assignment: dict[int, bool]) -> str:
    lits = [v if val else -v for v, val in sorted(assignment.items())]
    return "v " + " ".join(str(l) for l in lits) + " 0"


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    g = shared.add_argument_group("common")
    g.add_argument("--json", action="store_true", help="machine-readable output")
    g.add_argument("--trace", action="store_true", help="include the full event trace")
    g.add_argument("--seed", type=int, default=None, help="RNG seed (default: $X1SCAN_SEED or 0)")
    g.add_argument("--order", choices=("fixed", "random"), default="fixed",
                   help="literal check order")
    g.add_argument("--parallel", type=int, nargs="?", const=4, default=0, metavar="N",
                   help="snapshot-concurrent incompatibility checks")
    g.add_argument("--budget-states", type=int, default=None, metavar="N",
                   help="reachability state budget (default: $X1SCAN_BUDGET or "
                        f"{DEFAULT_STATE_BUDGET})")
    g.add_argument("--no-timing", action="store_true", help="omit timing fields")

    p = _Parser(prog="x1scan", description="Exactly-1 3SAT scan solver and checking harness")
    sub = p.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[shared], help="run the scan procedure")
    solve.add_argument("path", help="X-DIMACS file, or - for stdin")

    oracle = sub.add_parser("oracle", parents=[shared], help="brute-force ground truth")
    oracle.add_argument("path", help=f"X-DIMACS file (n <= {BRUTE_VAR_LIMIT})")

    net = sub.add_parser("net", parents=[shared], help="emit a Petri net construction")
    net.add_argument("path", help="X-DIMACS file, or - for stdin")
    direction = net.add_mutually_exclusive_group()
    direction.add_argument("--forward", action="store_true", help="clause-checking net")
    direction.add_argument("--inverse", action="store_true",
                           help="solver-side net (default)")
    net.add_argument("--dot", action="store_true", help="Graphviz output")
    net.add_argument("--check-reach", action="store_true",
                     help="also decide target reachability")

    diff = sub.add_parser("diff", parents=[shared], help="differential campaign vs oracle")
    diff.add_argument("--count", type=int, default=1000)
    diff.add_argument("--n-min", type=int, default=2)
    diff.add_argument("--n-max", type=int, default=8)
    diff.add_argument("--m-min", type=int, default=None)
    diff.add_argument("--m-max", type=int, default=None)
    diff.add_argument("--profiles", default="mixed",
                      help="comma-separated: uniform3,mixed,adversarial")
    diff.add_argument("--permutations", type=int, default=10,
                      help="random check orders per instance")
    diff.add_argument("--out", default=None, metavar="DIR",
                      help="write the discrepancy corpus here")

    bench = sub.add_parser("bench", parents=[shared], help="empirical scaling ladder")
    bench.add_argument("--sizes", default="25,50,100,200,400",
                       help="comma-separated n ladder")
    bench.add_argument("--m-factor", type=int, default=4, help="m = factor * n")
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--profile", default="uniform3", choices=("uniform3", "mixed", "adversarial"))
    return p


def cmd_solve(args) -> int:
    f = _load_formula(args.path)
    t0 = time.perf_counter()
    v = scan(f, _scan_options(args))
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    if args.json:
        doc = verdict_as_dict(v, include_trace=args.trace)
        if not args.no_timing:
            doc["timing_ms"] = elapsed_ms
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        if v.trace["conversion"] is not None:
            c = v.trace["conversion"]
            print(f"c converted special formula: forced={c['forced']} "
                  f"removed={c['removed_clauses']}")
        if v.trace["completion"]:
            picks = [e["picked"] for e in v.trace["completion"]]
            print(f"c completion picks (procedure gave no verdict): {picks}")
        print(f"c rounds {v.rounds}")
        if not args.no_timing:
            print(f"c time {elapsed_ms:.3f} ms")
        print(_STATUS_LINE[v.status])
        if v.assignment is not None:
            print(_value_line(v.assignment))
        if v.verification is not None and not v.verification["passed"]:
            print(f"c verification failed on clauses {v.verification['failed']}")
    return _STATUS_EXIT[v.status]


def cmd_oracle(args) -> int:
    f = _load_formula(args.path)
    t0 = time.perf_counter()
    model = brute_force_sat(f)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    status = "sat" if model is not None else "unsat"
    if args.json:
        doc = {
            "status": status,
            "assignment": None if model is None
            else [v if val else -v for v, val in sorted(model.items())],
        }
        if not args.no_timing:
            doc["timing_ms"] = elapsed_ms
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(_STATUS_LINE[status])
        if model is not None:
            print(_value_line(model))
    return _STATUS_EXIT[status]


def cmd_net(args) -> int:
    if args.dot and args.json:
        raise ValueError("--dot and --json are mutually exclusive")
    f = _load_formula(args.path)
    notice = None
    if classify(f).kind == "special":
        conv = convert_special(f)  # ConversionUnsat surfaces as an internal error
        notice = {"forced": list(conv.forced), "removed_clauses": list(conv.removed_clauses)}
        print(f"c converted special formula: forced={notice['forced']} "
              f"removed={notice['removed_clauses']}", file=sys.stderr)
        f = conjoin_forced(conv, f)

    net = build_forward_net(f) if args.forward else build_inverse_net(f)
    reached = None
    if args.check_reach:
        reached = target_reachable(net, engine="search",
                                   state_budget=_resolve_budget(args))

    if args.dot:
        print(export_dot(net))
    elif args.json:
        doc = net_as_dict(net)
        if reached is not None:
            doc["target_reachable"] = reached
        if notice is not None:
            doc["conversion_notice"] = notice
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        cset = root_conflicts(net)
        print(f"c {net.name}: {len(net.places)} places, {len(net.transitions)} "
              f"transitions, {len(cset)} conflict places")
        for place, ts in cset.items():
            print(f"c conflict {place}: {' '.join(ts)}")
        if reached is not None:
            print("s REACHABLE" if reached else "s UNREACHABLE")
    return 0


def cmd_diff(args) -> int:
    if (args.m_min is None) != (args.m_max is None):
        raise ValueError("--m-min and --m-max must be given together")
    params = DiffParams(
        count=args.count,
        n_range=(args.n_min, args.n_max),
        m_range=None if args.m_min is None else (args.m_min, args.m_max),
        profiles=tuple(args.profiles.split(",")),
        seed=_resolve_seed(args),
        permutations=args.permutations,
        no_timing=args.no_timing,
    )
    opts = ScanOptions(order=args.order, seed=_resolve_seed(args), parallel=args.parallel)
    report = differential_run(params, opts=opts)
    if args.out:
        written = write_discrepancies(report, args.out)
        print(f"c wrote {len(written)} discrepancy files to {args.out}", file=sys.stderr)
    print(json.dumps(report_as_dict(report), indent=2, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if not sizes:
        raise ValueError("empty size ladder")
    seed = _resolve_seed(args)
    opts = ScanOptions(order=args.order, seed=seed, parallel=args.parallel)
    rows = []
    for n in sizes:
        m = args.m_factor * n
        f = generate_random(n, m, seed=seed, profile=args.profile)
        times = []
        for _ in range(max(1, args.repeats)):
            t0 = time.perf_counter()
            scan(f, opts)
            times.append((time.perf_counter() - t0) * 1000.0)
        rows.append((n, m, statistics.median(times)))

    print("n,m,median_ms")
    for n, m, med in rows:
        print(f"{n},{m},{med:.3f}")
    if len(rows) >= 2:
        reg = statistics.linear_regression(
            [log(n) for n, _, _ in rows], [log(med) for _, _, med in rows]
        )
        print(f"# loglog_slope {reg.slope:.3f}")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "net": cmd_net,
    "diff": cmd_diff,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, FileNotFoundError, IsADirectoryError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OracleBudgetError, ReachabilityBudgetError, ScanResourceError,
            ConversionUnsat) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
