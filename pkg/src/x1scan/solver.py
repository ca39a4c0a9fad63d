"""The scan loop: repeated necessary-literal discards and incompatibility
checks until a verdict falls out.

One round: first drain necessary literals (sole members of a live clause, or
conjuncts that emerged during an earlier discard and still await their own),
discarding the opposite polarity one at a time with a full restart after each;
then probe every still-open literal (ascending variable, positive polarity
first) with the scope check. An incompatible literal is discarded and the
round restarts; a covering satisfiable scope ends the run with its model. A
full pass with neither means the procedure claims satisfiability. At that
point any variable still open in a live clause is settled by a documented
completion rule: pick its positive polarity (the pass just found both
polarities inconclusive) and discard the negative one. Every completion pick
taints the run: from then on a contradiction no longer proves unsatisfiability
and is reported as claimed_sat_unverified instead.

Verdict statuses:

* sat                     - assignment produced and verified clause by clause;
* unsat                   - a discard derived both polarities of some variable
                            before any completion pick;
* claimed_sat_unverified  - the procedure claimed satisfiability but the
                            assignment failed verification (kept verbatim as
                            evidence), or a tainted run dead-ended.

Verification always runs against the formula as given, before the rewrite of
both-polarity clauses.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .formula import (
    ConversionUnsat,
    Formula,
    conjoin_forced,
    convert_special,
    lit_true,
    negate,
    var_of,
)
from .reduction import (
    SolverState,
    discard,
    init_state,
    necessary_literals,
)
from .scope import (
    CoversSatisfiable,
    Incompatible,
    NotYet,
    build_scope,
    incompatible,
    scope_as_dict,
)


class ScanResourceError(RuntimeError):
    """Round cap exceeded; monotone shrinkage should make this impossible."""


@dataclass
class ScanOptions:
    order: str = "fixed"  # "fixed" | "random" (seeded shuffle of the check list)
    seed: int | None = None
    parallel: int = 0  # >1: checks of a pass run concurrently, merged in order
    trace_checks: bool = False  # keep a scope dump per incompatibility check
    audit_monotonicity: bool = False  # re-check past incompatibles after mutations
    ignore_incompatible_checks: bool = False  # fault injection for harness self-tests


@dataclass
class Verdict:
    status: str  # "sat" | "unsat" | "claimed_sat_unverified"
    assignment: dict[int, bool] | None
    rounds: int
    trace: dict
    verification: dict | None  # {"passed": bool, "failed": [clause ids]}


def extract_assignment(state: SolverState, base: dict[int, bool] | None = None) -> dict[int, bool]:
    """Read the assignment off the state: settled variables take their single
    eligible polarity, everything else (not covered by ``base``) reads false."""
    a = dict(base) if base else {}
    for v in range(1, state.base.n_vars + 1):
        if v in a:
            continue
        pols = state.live_literals[v]
        a[v] = pols[0] > 0 if len(pols) == 1 else False
    return a


class _MonotoneAudit:
    """Re-judges every literal found incompatible at the start of each later
    check pass: while still open it must stay incompatible.

    Re-checks only run where the procedure itself runs checks (necessary
    literals drained); a scope built mid-drain cannot see queued facts and
    its verdict means nothing."""

    def __init__(self) -> None:
        self.remembered: list[int] = []
        self.checked = 0
        self.violations: list[dict] = []

    def remember(self, z: int) -> None:
        if z not in self.remembered:
            self.remembered.append(z)

    def at_pass(self, state: SolverState) -> None:
        for z in self.remembered:
            if len(state.live_literals[var_of(z)]) != 2:
                continue
            self.checked += 1
            res = incompatible(state, z)
            if not isinstance(res, Incompatible):
                self.violations.append(
                    {"literal": z, "round": state.scan_round,
                     "became": type(res).__name__}
                )


def _verify(f: Formula, a: dict[int, bool]) -> dict:
    failed = []
    for c in f.clauses:
        if sum(1 for lit in c.lits if lit_true(lit, a)) != 1:
            failed.append(c.id)
    return {"passed": not failed, "failed": failed}


def scan(f: Formula, opts: ScanOptions | None = None) -> Verdict:
    opts = opts or ScanOptions()
    trace: dict = {
        "conversion": None,
        "events": [],
        "discards": [],
        "scopes": [],
        "completion": [],
        "monotonicity": None,
    }

    try:
        conv = convert_special(f)
    except ConversionUnsat as e:
        trace["conversion"] = {
            "forced": [], "removed_clauses": [], "contradiction_var": e.var
        }
        if opts.audit_monotonicity:
            trace["monotonicity"] = {"checked": 0, "violations": []}
        return Verdict("unsat", None, 0, trace, None)
    if conv.forced or conv.removed_clauses:
        trace["conversion"] = {
            "forced": list(conv.forced),
            "removed_clauses": list(conv.removed_clauses),
            "contradiction_var": None,
        }

    state = init_state(conjoin_forced(conv, f))
    rng = random.Random(opts.seed)
    audit = _MonotoneAudit() if opts.audit_monotonicity else None
    tainted = False

    def verdict(status: str, assignment: dict[int, bool] | None,
                verification: dict | None) -> Verdict:
        trace["events"] = list(state.events)
        if audit is not None:
            trace["monotonicity"] = {
                "checked": audit.checked, "violations": audit.violations
            }
        assert state.scan_round <= f.n_vars + 1, "more discards than variables"
        return Verdict(status, assignment, state.scan_round, trace, verification)

    def run_discard(z: int, via: str, source: int | None) -> int | None:
        r = state.scan_round
        conflict = discard(state, z)
        trace["discards"].append(
            {"round": r, "literal": z, "via": via, "source_clause": source}
        )
        return conflict

    def finish_sat(assignment: dict[int, bool]) -> Verdict:
        check = _verify(f, assignment)
        status = "sat" if check["passed"] else "claimed_sat_unverified"
        return verdict(status, assignment, check)

    cap = max(2 * f.n_vars * f.n_vars, 8)
    passes = 0
    while True:
        passes += 1
        if passes > cap:
            raise ScanResourceError(f"exceeded {cap} scan passes on n={f.n_vars}")

        nec = necessary_literals(state)
        if nec:
            lit, cid = nec[0]
            conflict = run_discard(negate(lit), "necessary", cid)
            if conflict is not None:
                if tainted:
                    return verdict("claimed_sat_unverified", None, None)
                return verdict("unsat", None, None)
            continue

        if audit is not None:
            audit.at_pass(state)

        zs = [
            z
            for v in sorted(state.live_literals)
            if len(state.live_literals[v]) == 2
            for z in state.live_literals[v]
        ]
        if opts.order == "random":
            rng.shuffle(zs)

        hit: tuple[int, object] | None = None
        if opts.parallel > 1 and zs:
            with ThreadPoolExecutor(max_workers=opts.parallel) as ex:
                results = list(ex.map(lambda z: incompatible(state, z), zs))
            if audit is not None and not opts.ignore_incompatible_checks:
                # non-winning incompatibles stay open; they must stay incompatible
                for z, res in zip(zs, results):
                    if isinstance(res, Incompatible):
                        audit.remember(z)
            pairs = zip(zs, results)
        else:
            pairs = ((z, incompatible(state, z)) for z in zs)
        for z, res in pairs:
            if opts.trace_checks:
                trace["scopes"].append(
                    scope_as_dict(build_scope(state, z), z, _check_name(res))
                )
            if isinstance(res, Incompatible) and opts.ignore_incompatible_checks:
                continue
            if not isinstance(res, NotYet):
                hit = (z, res)
                break

        if hit is not None:
            z, res = hit
            if isinstance(res, Incompatible):
                if audit is not None:
                    audit.remember(z)
                conflict = run_discard(z, "incompatible", None)
                if conflict is not None:
                    if tainted:
                        return verdict("claimed_sat_unverified", None, None)
                    return verdict("unsat", None, None)
                continue
            assert isinstance(res, CoversSatisfiable)
            return finish_sat(extract_assignment(state, base=res.model))

        open_in_live = sorted(
            {
                var_of(l)
                for ls in state.live.values()
                for l in ls
                if len(state.live_literals[var_of(l)]) == 2
            }
        )
        if open_in_live:
            v = open_in_live[0]
            picked = state.live_literals[v][0]  # positive polarity
            tainted = True
            trace["completion"].append({"var": v, "picked": picked})
            conflict = run_discard(negate(picked), "completion", None)
            if conflict is not None:
                return verdict("claimed_sat_unverified", None, None)
            continue

        assert state.n_conflict is None, "unreported conjunct contradiction"
        return finish_sat(extract_assignment(state))


def _check_name(res) -> str:
    if isinstance(res, Incompatible):
        return "incompatible"
    if isinstance(res, NotYet):
        return "not_yet"
    return "covers_satisfiable"


def verdict_as_dict(v: Verdict, include_trace: bool = True) -> dict:
    """JSON-ready verdict; assignment rendered as sorted signed literals."""
    assignment = None
    if v.assignment is not None:
        assignment = [var if val else -var for var, val in sorted(v.assignment.items())]
    out = {
        "status": v.status,
        "assignment": assignment,
        "rounds": v.rounds,
        "verification": v.verification,
    }
    if include_trace:
        out["trace"] = v.trace
    return out
