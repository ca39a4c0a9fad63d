"""Reduction engine: the solver's mutable view of the current formula.

The scan procedure never rewrites Formula objects. It works on a SolverState
holding, per clause, the *live* literal list (shrinking as literals are ruled
out, emptying once the clause's content has been absorbed into fixed
conjuncts), plus:

* an occurrence index, literal -> sorted clause ids currently containing it;
* per variable, which polarities are still eligible (both at the start, one
  after the other was discarded);
* the conjunct set N of literals fixed true, in derivation order;
* a pending map, conjunct -> clause id it emerged from. Emptying a clause on
  unit emergence loses the "sole member of clause k" fact that the necessary-
  literal rule reads, so that attribution is kept here.

Reduction queries see only clauses with at least two live literals: a clause
already down to one literal is a conjunct-in-waiting, not a residue, and unit
clauses of the *input* are likewise invisible to reduction (they seed N
directly). The stored occurrence index itself is unfiltered; the filter is
applied per query, which keeps rebuild-and-compare checks trivial.

All iteration orders are deterministic (ascending clause ids, literal order
within a clause), so event logs and traces are reproducible byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .formula import Formula, classify, formula, negate, var_of


class ReductionError(ValueError):
    """State misuse: special input, double discard, unknown literal."""


@dataclass
class SolverState:
    base: Formula
    live: dict[int, list[int]]  # clause id -> live literals ([] once absorbed)
    occurrence: dict[int, list[int]]  # literal -> sorted ids of clauses holding it
    live_literals: dict[int, tuple[int, ...]]  # var -> eligible polarities
    conjuncts: set[int]  # N
    conjunct_order: list[int]
    pending: dict[int, int]  # emerged conjunct -> source clause id
    scan_round: int = 1
    n_conflict: int | None = None  # var with both polarities in N, once seen
    three_live: int = 0  # count of live 3-literal residues, kept incrementally
    events: list[dict] = field(default_factory=list)

    def log(self, kind: str, clause: int | None, literals: list[int]) -> None:
        self.events.append(
            {"round": self.scan_round, "kind": kind, "clause": clause,
             "literals": list(literals)}
        )


def init_state(f: Formula) -> SolverState:
    cls = classify(f)
    if cls.kind != "general":
        raise ReductionError(
            f"reduction needs a general formula; special witnesses: {cls.special}"
        )
    occurrence: dict[int, list[int]] = {}
    for c in f.clauses:
        for lit in c.lits:
            occurrence.setdefault(lit, []).append(c.id)
    state = SolverState(
        base=f,
        live={c.id: list(c.lits) for c in f.clauses},
        occurrence={lit: sorted(ids) for lit, ids in occurrence.items()},
        live_literals={v: (v, -v) for v in range(1, f.n_vars + 1)},
        conjuncts=set(),
        conjunct_order=[],
        pending={},
        three_live=sum(1 for c in f.clauses if len(c.lits) == 3),
    )
    for c in f.clauses:
        if c.is_conjunct:
            _add_conjunct(state, c.lits[0], source=c.id)
    return state


def clone(state: SolverState) -> SolverState:
    """Independent copy; scratch mutations never touch the original."""
    return SolverState(
        base=state.base,
        live={k: list(ls) for k, ls in state.live.items()},
        occurrence={lit: list(ids) for lit, ids in state.occurrence.items()},
        live_literals=dict(state.live_literals),
        conjuncts=set(state.conjuncts),
        conjunct_order=list(state.conjunct_order),
        pending=dict(state.pending),
        scan_round=state.scan_round,
        n_conflict=state.n_conflict,
        three_live=state.three_live,
        events=list(state.events),
    )


def conflict_index(state: SolverState, lit: int) -> list[int]:
    """Clause ids where ``lit`` sits in a residue of >= 2 live literals."""
    return [k for k in state.occurrence.get(lit, ()) if len(state.live[k]) >= 2]


def _empty_clause(state: SolverState, k: int) -> None:
    if len(state.live[k]) == 3:
        state.three_live -= 1
    for lit in state.live[k]:
        state.occurrence[lit].remove(k)
    state.live[k] = []


def _add_conjunct(state: SolverState, lit: int, source: int | None) -> None:
    if lit in state.conjuncts:
        return
    if negate(lit) in state.conjuncts and state.n_conflict is None:
        state.n_conflict = var_of(lit)
    state.conjuncts.add(lit)
    state.conjunct_order.append(lit)
    if source is not None:
        state.pending.setdefault(lit, source)
    state.log("conjunct_added", source, [lit])


def reduce_on_true(state: SolverState, z: int) -> list[tuple[int, int]]:
    """Absorb every clause containing ``z`` (held true): its other literals
    are all false. Returns the emerged conjuncts as (literal, source clause)."""
    emerged: list[tuple[int, int]] = []
    for k in conflict_index(state, z):
        others = [l for l in state.live[k] if l != z]
        state.log("clause_to_conjunction", k, [negate(l) for l in others])
        _empty_clause(state, k)
        emerged.extend((negate(l), k) for l in others)
    return emerged


def reduce_on_false(state: SolverState, z: int) -> list[tuple[int, int]]:
    """Delete ``z`` (held false) from every residue containing it. A residue
    shrinking to a single literal empties and emerges that literal."""
    emerged: list[tuple[int, int]] = []
    for k in conflict_index(state, z):
        state.live[k].remove(z)
        state.occurrence[z].remove(k)
        rest = state.live[k]
        if len(rest) == 2:
            state.three_live -= 1
        if len(rest) == 1:
            u = rest[0]
            state.log("two_to_unit", k, [u])
            _empty_clause(state, k)
            emerged.append((u, k))
        else:
            # the >= 2 query filter makes an empty residue impossible here
            state.log("three_to_two", k, [z])
    return emerged


def discard(state: SolverState, z_v: int) -> int | None:
    """Rule literal ``z_v`` out. Returns the conflicting variable when the
    conjunct set gains both polarities of some variable (input unsatisfiable),
    else None. One discard per variable: afterwards only ``-z_v`` is eligible.

    Fixed step order: -z_v joins N; clauses containing -z_v collapse to
    conjuncts; polarity-pair check on N; z_v is deleted from the remaining
    residues (units emerging there join N unchecked -- the next discard's pair
    check catches any contradiction before an assignment can be extracted);
    the variable's eligible polarities shrink to -z_v; the round counter bumps.
    """
    v = var_of(z_v)
    if v not in state.live_literals:
        raise ReductionError(f"unknown variable {v}")
    if z_v not in state.live_literals[v]:
        raise ReductionError(f"literal {z_v} already discarded")
    _add_conjunct(state, negate(z_v), source=None)
    for lit, k in reduce_on_true(state, negate(z_v)):
        _add_conjunct(state, lit, source=k)
    if state.n_conflict is not None:
        return state.n_conflict
    for lit, k in reduce_on_false(state, z_v):
        _add_conjunct(state, lit, source=k)
    state.live_literals[v] = (negate(z_v),)
    state.log("literal_discarded", None, [z_v])
    state.scan_round += 1
    # units emerging in the deletion phase can complete a polarity pair in N;
    # report it now rather than leaving it for the next discard's check
    return state.n_conflict


def necessary_literals(state: SolverState) -> list[tuple[int, int]]:
    """Literals that must hold: sole members of a live clause, plus emerged
    conjuncts still awaiting their discard. Only variables with both
    polarities eligible are reported; each literal once, first source wins."""
    out: list[tuple[int, int]] = []
    seen: set[int] = set()
    for k in sorted(state.live):
        ls = state.live[k]
        if len(ls) == 1:
            lit = ls[0]
            if len(state.live_literals[var_of(lit)]) == 2 and lit not in seen:
                out.append((lit, k))
                seen.add(lit)
    for lit, k in state.pending.items():
        if len(state.live_literals[var_of(lit)]) == 2 and lit not in seen:
            out.append((lit, k))
            seen.add(lit)
    return out


# --- introspection helpers (tests, trace rendering) ---------------------------


def rebuild_occurrence(state: SolverState) -> dict[int, list[int]]:
    occ: dict[int, list[int]] = {}
    for k in sorted(state.live):
        for lit in state.live[k]:
            occ.setdefault(lit, []).append(k)
    return occ


def index_consistent(state: SolverState) -> bool:
    stored = {lit: ids for lit, ids in state.occurrence.items() if ids}
    if rebuild_occurrence(state) != stored:
        return False
    return state.three_live == sum(1 for ls in state.live.values() if len(ls) == 3)


def as_formula(state: SolverState) -> Formula:
    """Residues plus conjuncts as a plain formula (ids renumbered); the model
    set matches the state's remaining constraints."""
    rows = [list(ls) for _, ls in sorted(state.live.items()) if ls]
    rows += [[lit] for lit in state.conjunct_order]
    return formula(state.base.n_vars, rows)


def fingerprint(state: SolverState) -> tuple:
    """Stable digest of everything a mutation could touch."""
    return (
        tuple(sorted((k, tuple(ls)) for k, ls in state.live.items())),
        tuple(sorted(state.conjuncts)),
        tuple(sorted(state.live_literals.items())),
        tuple(state.pending.items()),
        state.scan_round,
        state.n_conflict,
    )


def event_lines(state: SolverState) -> str:
    """Event log as JSON lines, one object per event, key-sorted."""
    return "".join(json.dumps(e, sort_keys=True) + "\n" for e in state.events)
