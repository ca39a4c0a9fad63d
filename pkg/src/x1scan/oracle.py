"""Ground-truth oracles, instance generation, differential testing, and
counterexample minimization.

The brute-force enumerator is the reference semantics everything else is
judged against. The differential harness runs the scan loop against it over
seeded corpora, re-verifies every claimed model, cross-checks tiny instances
against both Petri-net constructions, measures order robustness, and shrinks
any disagreement to a small reproducer.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from random import Random
from typing import Iterable, Iterator

from .formula import Formula, classify, convert_special, emit_x1cnf, formula
from .petri import build_forward_net, build_inverse_net, target_reachable
from .solver import ScanOptions, scan

BRUTE_VAR_LIMIT = 24


class OracleBudgetError(RuntimeError):
    pass


def brute_force_sat(f: Formula) -> dict[int, bool] | None:
    """First satisfying assignment in lexicographic order (all-false first),
    or None. Exhaustive over 2^n, so guarded at n <= 24."""
    if f.n_vars > BRUTE_VAR_LIMIT:
        raise OracleBudgetError(f"n={f.n_vars} exceeds brute-force limit {BRUTE_VAR_LIMIT}")
    rows = [c.lits for c in f.clauses]
    for bits in itertools.product((False, True), repeat=f.n_vars):
        ok = True
        for lits in rows:
            hits = 0
            for l in lits:
                if (l > 0) == bits[abs(l) - 1]:
                    hits += 1
                    if hits > 1:
                        break
            if hits != 1:
                ok = False
                break
        if ok:
            return {v: bits[v - 1] for v in range(1, f.n_vars + 1)}
    return None


# ---------------------------------------------------------------------------
# instance generation

PROFILES = ("uniform3", "mixed", "adversarial")


def _draw_clause(rng: Random, n: int, profile: str, prev: tuple[int, ...] | None):
    if profile == "uniform3":
        vs = rng.sample(range(1, n + 1), 3)
    elif profile == "mixed":
        size = min(rng.choices((1, 2, 3), weights=(1, 2, 7))[0], n)
        vs = rng.sample(range(1, n + 1), size)
    elif profile == "adversarial":
        if prev is None:
            vs = rng.sample(range(1, n + 1), 3)
        else:
            shared = rng.choice([abs(l) for l in prev])
            rest = [v for v in range(1, n + 1) if v != shared]
            vs = [shared] + rng.sample(rest, 2)
    else:
        raise ValueError(f"unknown profile {profile!r}")
    lits = sorted((v if rng.random() < 0.5 else -v for v in vs), key=abs)
    return tuple(lits)


def generate_random(n: int, m: int, seed: int, profile: str = "uniform3") -> Formula:
    """Seeded, reproducible instance. Clauses are distinct and use distinct
    variables, so the mandatory convert_special pass is an identity guard.

    uniform3: every clause has 3 literals. mixed: 1-3 literals weighted
    1:2:7. adversarial: 3-literal chain, each clause sharing a variable with
    its predecessor.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if profile in ("uniform3", "adversarial") and n < 3:
        raise ValueError(f"profile {profile} needs n >= 3")
    rng = Random(f"{profile}:{n}:{m}:{seed}")
    rows: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    attempts = 0
    while len(rows) < m:
        attempts += 1
        if attempts > 200 * (m + 1):
            raise ValueError(
                f"cannot draw {m} distinct {profile} clauses over {n} variables"
            )
        clause = _draw_clause(rng, n, profile, rows[-1] if rows else None)
        if clause in seen:
            continue
        seen.add(clause)
        rows.append(clause)
    conv = convert_special(formula(n, rows))
    assert not conv.forced and not conv.removed_clauses
    return conv.formula


# ---------------------------------------------------------------------------
# exhaustive corpora

def general_clause_types(n: int) -> list[tuple[int, ...]]:
    """Every 1-3 literal clause over n variables without a complementary pair,
    literals sorted by variable; lexicographic over (size, literals)."""
    lits = [l for v in range(1, n + 1) for l in (v, -v)]
    out = []
    for size in (1, 2, 3):
        for combo in itertools.combinations(lits, size):
            if any(-l in combo for l in combo):
                continue
            out.append(tuple(sorted(combo, key=abs)))
    return sorted(out, key=lambda c: (len(c), c))


def special_clause_types(n: int) -> list[tuple[int, ...]]:
    """2-3 literal clauses containing some {v, -v} pair."""
    lits = [l for v in range(1, n + 1) for l in (v, -v)]
    out = []
    for size in (2, 3):
        for combo in itertools.combinations(lits, size):
            if not any(-l in combo for l in combo):
                continue
            out.append(tuple(sorted(combo, key=lambda l: (abs(l), l < 0))))
    return sorted(out, key=lambda c: (len(c), c))


def exhaustive_general(n: int, max_m: int) -> Iterator[Formula]:
    """All clause multisets of size 1..max_m over the general alphabet."""
    types = general_clause_types(n)
    for m in range(1, max_m + 1):
        for rows in itertools.combinations_with_replacement(types, m):
            yield formula(n, rows)


def exhaustive_special(n: int, max_m: int) -> Iterator[Formula]:
    """All clause multisets of size 1..max_m over the full alphabet that
    contain at least one both-polarity clause."""
    general = set(general_clause_types(n))
    types = sorted(general | set(special_clause_types(n)), key=lambda c: (len(c), c))
    for m in range(1, max_m + 1):
        for rows in itertools.combinations_with_replacement(types, m):
            if all(r in general for r in rows):
                continue
            yield formula(n, rows)


def net_cross_check(f: Formula, oracle_sat: bool) -> list[str]:
    """Compare both net constructions against the oracle verdict. Any
    mismatch is a bug in the constructions here, never a solver finding."""
    problems = []
    for name, build in (("forward", build_forward_net), ("inverse", build_inverse_net)):
        reached = target_reachable(build(f), engine="levels")
        if reached != oracle_sat:
            problems.append(f"{name} net reachability {reached} vs oracle {oracle_sat}")
    return problems


# ---------------------------------------------------------------------------
# differential testing

@dataclass
class Disagreement:
    instance_id: int
    formula: Formula
    scan_status: str
    oracle_status: str
    minimized: Formula


@dataclass
class DiffReport:
    instance_count: int
    agreements: int
    disagreements: list[Disagreement]
    order_invariance: dict
    timing_ms: dict | None
    errors: list[dict] = field(default_factory=list)


@dataclass
class DiffParams:
    count: int
    n_range: tuple[int, int] = (2, 8)
    m_range: tuple[int, int] | None = None  # None: (1, 2n) per instance
    profiles: tuple[str, ...] = ("mixed",)
    seed: int = 0
    permutations: int = 10  # random check orders per instance
    no_timing: bool = False


def _agrees(status: str, oracle_sat: bool) -> bool:
    return (status == "sat" and oracle_sat) or (status == "unsat" and not oracle_sat)


def _percentiles(xs: list[float]) -> dict:
    s = sorted(xs)

    def pct(q: float) -> float:
        return s[min(len(s) - 1, int(q * len(s)))]

    return {"p50": pct(0.50), "p90": pct(0.90), "p99": pct(0.99), "max": s[-1]}


def differential_corpus(
    corpus: Iterable[Formula],
    opts: ScanOptions | None = None,
    permutations: int = 10,
    no_timing: bool = False,
    minimize: bool = True,
) -> DiffReport:
    """Scan-vs-oracle over an explicit corpus. Agreement means a verified sat
    against a satisfiable instance or an unsat against an unsatisfiable one;
    everything else (including claimed_sat_unverified) is a disagreement and
    gets minimized. Instances with n <= 3, m <= 4 and no both-polarity clause
    are additionally cross-checked against both net constructions."""
    base = opts or ScanOptions()
    disagreements: list[Disagreement] = []
    errors: list[dict] = []
    timings: list[float] = []
    invariant = 0
    varied: list[int] = []
    count = 0

    for i, f in enumerate(corpus):
        count += 1
        try:
            t0 = time.perf_counter()
            v = scan(f, base)
            timings.append((time.perf_counter() - t0) * 1000.0)
            oracle_sat = brute_force_sat(f) is not None
        except Exception as e:  # recorded, never fatal to the campaign
            errors.append({"instance_id": i, "error": f"{type(e).__name__}: {e}"})
            continue

        if f.n_vars <= 3 and f.n_clauses <= 4:
            for problem in _net_check_if_general(f, oracle_sat):
                errors.append({"instance_id": i, "error": problem})

        if permutations > 0:
            statuses = {
                scan(f, replace(base, order="random", seed=k)).status
                for k in range(permutations)
            }
            if statuses == {v.status}:
                invariant += 1
            elif len(varied) < 20:
                varied.append(i)

        if _agrees(v.status, oracle_sat):
            continue
        small = minimize_counterexample(f, base) if minimize else f
        disagreements.append(
            Disagreement(
                instance_id=i,
                formula=f,
                scan_status=v.status,
                oracle_status="sat" if oracle_sat else "unsat",
                minimized=small,
            )
        )

    order_stats = {
        "instances": count - len(errors),
        "permutations": permutations,
        "invariant": invariant,
        "varied_instances": varied,
    }
    return DiffReport(
        instance_count=count,
        agreements=count - len(disagreements) - len(errors),
        disagreements=disagreements,
        order_invariance=order_stats,
        timing_ms=None if no_timing or not timings else _percentiles(timings),
        errors=errors,
    )


def _net_check_if_general(f: Formula, oracle_sat: bool) -> list[str]:
    if classify(f).kind != "general":
        return []
    return net_cross_check(f, oracle_sat)


def generate_campaign(params: DiffParams) -> Iterator[Formula]:
    rng = Random(f"campaign:{params.seed}")
    for i in range(params.count):
        n = rng.randint(*params.n_range)
        lo, hi = params.m_range if params.m_range else (1, 2 * n)
        m = rng.randint(lo, hi)
        profile = params.profiles[i % len(params.profiles)]
        if profile in ("uniform3", "adversarial"):
            n = max(n, 3)
        yield generate_random(n, m, seed=params.seed * 1_000_003 + i, profile=profile)


def differential_run(params: DiffParams, opts: ScanOptions | None = None) -> DiffReport:
    return differential_corpus(
        generate_campaign(params),
        opts=opts,
        permutations=params.permutations,
        no_timing=params.no_timing,
    )


# ---------------------------------------------------------------------------
# minimization

def _disagrees(rows: list[tuple[int, ...]], n_vars: int, opts: ScanOptions | None) -> bool:
    f = formula(n_vars, rows)
    v = scan(f, opts)
    return not _agrees(v.status, brute_force_sat(f) is not None)


def minimize_counterexample(f: Formula, opts: ScanOptions | None = None) -> Formula:
    """Greedy delta debugging: drop whole clauses, then drop literals from
    3-literal clauses, keeping every step that still disagrees; repeats to a
    fixpoint. The result is clause-minimal under single drops."""
    rows = [tuple(c.lits) for c in f.clauses]
    if not _disagrees(rows, f.n_vars, opts):
        raise ValueError("input is not a scan/oracle disagreement")

    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(rows):
            candidate = rows[:i] + rows[i + 1:]
            if candidate and _disagrees(candidate, f.n_vars, opts):
                rows = candidate
                changed = True
            else:
                i += 1
        for i, clause in enumerate(rows):
            if len(clause) != 3:
                continue
            for j in range(3):
                shrunk = clause[:j] + clause[j + 1:]
                candidate = rows[:i] + [shrunk] + rows[i + 1:]
                if _disagrees(candidate, f.n_vars, opts):
                    rows = candidate
                    changed = True
                    break
    return formula(f.n_vars, rows)


# ---------------------------------------------------------------------------
# report emission

def _formula_rows(f: Formula) -> dict:
    return {"n": f.n_vars, "clauses": [list(c.lits) for c in f.clauses]}


def report_as_dict(report: DiffReport) -> dict:
    return {
        "instance_count": report.instance_count,
        "agreements": report.agreements,
        "disagreements": [
            {
                "instance_id": d.instance_id,
                "formula": _formula_rows(d.formula),
                "scan_status": d.scan_status,
                "oracle_status": d.oracle_status,
                "minimized": _formula_rows(d.minimized),
            }
            for d in report.disagreements
        ],
        "order_invariance": report.order_invariance,
        "timing_ms": report.timing_ms,
        "errors": report.errors,
    }


def write_discrepancies(report: DiffReport, out_dir: str | Path) -> list[Path]:
    """One X-DIMACS file per minimized disagreement plus a JSON sidecar with
    both verdicts and a reproducer command."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for d in report.disagreements:
        stem = f"disagreement_{d.instance_id:05d}"
        cnf = out / f"{stem}.cnf"
        cnf.write_text(emit_x1cnf(d.minimized))
        sidecar = out / f"{stem}.json"
        sidecar.write_text(
            json.dumps(
                {
                    "original": _formula_rows(d.formula),
                    "minimized": _formula_rows(d.minimized),
                    "scan_status": d.scan_status,
                    "oracle_status": d.oracle_status,
                    "reproduce": f"x1scan solve --json {cnf.name}",
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
        written += [cnf, sidecar]
    return written
