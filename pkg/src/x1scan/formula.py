"""Exactly-1 3SAT formulas: types, X-DIMACS parsing, evaluation, special-clause rewriting.

A literal is a nonzero signed int in DIMACS convention: ``v`` means variable ``v``
is true, ``-v`` means it is false. Variables are numbered from 1. A clause holds
one to three distinct literals and is satisfied when *exactly one* of them is true
under a total assignment. A one-literal clause is a conjunct: it pins its literal.

Formulas are *general* when no clause contains both polarities of a variable, and
*special* otherwise. Special formulas can be rewritten into general ones plus a
list of forced literals (see :func:`convert_special`); the rewrite preserves
exactly-1 satisfiability.

The X-DIMACS file format::

    c optional comments
    p x1cnf <n_vars> <n_clauses>
    1 -3 0
    1 -2 3 0

Clause lines are 1..3 nonzero ints terminated by ``0``. Clause ids are assigned
in input order starting at 1 and are stable: no operation in this package ever
renumbers them.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

MAX_CLAUSE_LITERALS = 3


class FormulaError(ValueError):
    """Structurally invalid formula or literal."""


class ParseError(FormulaError):
    """X-DIMACS input rejected; message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class IncompleteAssignmentError(FormulaError):
    """evaluate_exactly1 needs a value for every mentioned variable."""


def negate(lit: int) -> int:
    """Negation is unary minus on the int encoding; an involution by construction."""
    if lit == 0:
        raise FormulaError("0 is not a literal")
    return -lit


def var_of(lit: int) -> int:
    return abs(lit)


@dataclass(frozen=True)
class Clause:
    """A clause with its stable id. Literal order is input order."""

    id: int
    lits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.lits) <= MAX_CLAUSE_LITERALS:
            raise FormulaError(
                f"clause {self.id}: {len(self.lits)} literals (want 1..{MAX_CLAUSE_LITERALS})"
            )
        if 0 in self.lits:
            raise FormulaError(f"clause {self.id}: literal 0")
        if len(set(self.lits)) != len(self.lits):
            raise FormulaError(f"clause {self.id}: duplicate literal")

    @property
    def is_conjunct(self) -> bool:
        return len(self.lits) == 1

    def special_var(self) -> int | None:
        """The variable present in both polarities, if any."""
        vs = {var_of(l) for l in self.lits}
        if len(vs) < len(self.lits):
            for l in self.lits:
                if -l in self.lits:
                    return var_of(l)
        return None


@dataclass(frozen=True)
class Formula:
    n_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if self.n_vars < 0:
            raise FormulaError("n_vars must be >= 0")
        for c in self.clauses:
            for lit in c.lits:
                if var_of(lit) > self.n_vars:
                    raise FormulaError(
                        f"clause {c.id}: variable {var_of(lit)} exceeds n_vars={self.n_vars}"
                    )

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def clause_by_id(self, cid: int) -> Clause:
        for c in self.clauses:
            if c.id == cid:
                return c
        raise KeyError(cid)


def formula(n_vars: int, lit_rows: Iterable[Sequence[int]]) -> Formula:
    """Build a Formula from rows of literals, assigning ids 1.. in order."""
    clauses = tuple(Clause(i + 1, tuple(row)) for i, row in enumerate(lit_rows))
    return Formula(n_vars, clauses)


# --- X-DIMACS ---------------------------------------------------------------


def parse_x1cnf(text: str) -> Formula:
    """Parse X-DIMACS. Raises ParseError with the offending line number."""
    header: tuple[int, int] | None = None
    rows: list[tuple[int, ...]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "x1cnf":
                raise ParseError(line_no, f"malformed header: {raw!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(line_no, f"malformed header counts: {raw!r}") from None
            if n < 0 or m < 0:
                raise ParseError(line_no, "header counts must be nonnegative")
            header = (n, m)
            continue
        try:
            nums = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(line_no, f"non-integer token: {raw!r}") from None
        if nums[-1] != 0:
            raise ParseError(line_no, "clause line must end with 0")
        lits = nums[:-1]
        if 0 in lits:
            raise ParseError(line_no, "literal 0 inside clause")
        if not lits:
            raise ParseError(line_no, "empty clause")
        if len(lits) > MAX_CLAUSE_LITERALS:
            raise ParseError(line_no, f"{len(lits)} literals in clause (max {MAX_CLAUSE_LITERALS})")
        if len(set(lits)) != len(lits):
            raise ParseError(line_no, "duplicate literal in clause")
        n = header[0]
        for lit in lits:
            if var_of(lit) > n:
                raise ParseError(line_no, f"variable {var_of(lit)} exceeds declared n={n}")
        rows.append(tuple(lits))
    if header is None:
        raise ParseError(1, "missing header")
    if len(rows) != header[1]:
        raise ParseError(
            1, f"header declares {header[1]} clauses, file has {len(rows)}"
        )
    return formula(header[0], rows)


def emit_x1cnf(f: Formula) -> str:
    """Canonical byte-deterministic emission: header then clauses in id order."""
    out = io.StringIO()
    out.write(f"p x1cnf {f.n_vars} {f.n_clauses}\n")
    for c in sorted(f.clauses, key=lambda c: c.id):
        out.write(" ".join(str(l) for l in c.lits))
        out.write(" 0\n")
    return out.getvalue()


# --- evaluation --------------------------------------------------------------

Assignment = Mapping[int, bool]


def lit_true(lit: int, a: Assignment) -> bool:
    return a[var_of(lit)] == (lit > 0)


def evaluate_exactly1(f: Formula, a: Assignment) -> bool:
    """True iff every clause has exactly one true literal under ``a``.

    ``a`` must cover every variable mentioned in ``f`` (a partial map over
    unmentioned variables is fine). Missing mentioned vars raise.
    """
    for c in f.clauses:
        count = 0
        for lit in c.lits:
            v = var_of(lit)
            if v not in a:
                raise IncompleteAssignmentError(
                    f"clause {c.id}: variable {v} unassigned"
                )
            if a[v] == (lit > 0):
                count += 1
        if count != 1:
            return False
    return True


# --- classification and special-clause rewriting ------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str  # "general" | "special"
    special: tuple[tuple[int, int], ...] = ()  # (clause id, variable) witnesses


def classify(f: Formula) -> Classification:
    hits = tuple(
        (c.id, sv) for c in f.clauses if (sv := c.special_var()) is not None
    )
    return Classification("special" if hits else "general", hits)


class ConversionUnsat(Exception):
    """The rewrite forced both polarities of some variable."""

    def __init__(self, var: int):
        super().__init__(f"conversion forced both polarities of variable {var}")
        self.var = var


@dataclass
class Conversion:
    formula: Formula
    forced: tuple[int, ...]  # literals pinned true, in derivation order
    removed_clauses: tuple[int, ...] = ()  # original ids dropped as tautologies


def convert_special(f: Formula) -> Conversion:
    """Rewrite a special formula into a general one plus forced literals.

    A clause {z, x, -x} admits exactly one true literal among {x, -x} already,
    so z must be false: -z is forced, z is deleted from every clause, and the
    clause itself drops as a tautology. A bare {x, -x} clause likewise drops.
    Repeats to fixpoint (deleting literals can shrink clauses but never creates
    a new both-polarity pair). Forcing both polarities raises ConversionUnsat.

    Clause ids of surviving clauses are preserved.
    """
    rows: dict[int, list[int]] = {c.id: list(c.lits) for c in f.clauses}
    forced: list[int] = []
    forced_set: set[int] = set()
    removed: list[int] = []

    def force(lit: int) -> None:
        if -lit in forced_set:
            raise ConversionUnsat(var_of(lit))
        if lit not in forced_set:
            forced_set.add(lit)
            forced.append(lit)

    changed = True
    while changed:
        changed = False
        for cid in sorted(rows):
            lits = rows[cid]
            pair_var = None
            for l in lits:
                if -l in lits:
                    pair_var = var_of(l)
                    break
            if pair_var is None:
                continue
            rest = [l for l in lits if var_of(l) != pair_var]
            for z in rest:
                force(-z)
            del rows[cid]
            removed.append(cid)
            changed = True
            # a forced -z deletes z everywhere; may cascade into new forcings
            for z in rest:
                for ocid in sorted(rows):
                    olits = rows[ocid]
                    if z in olits:
                        olits.remove(z)
                        if not olits:
                            # clause demanded z true while z is forced false
                            raise ConversionUnsat(var_of(z))
            break

    # clauses containing -z survive untouched: consumers get the forced list
    # and must conjoin it themselves
    kept = tuple(
        Clause(cid, tuple(rows[cid])) for cid in sorted(rows)
    )
    return Conversion(Formula(f.n_vars, kept), tuple(forced), tuple(removed))


def conjoin_forced(conv: Conversion, original: Formula) -> Formula:
    """The converted formula with each forced literal appended as a fresh
    unit clause, numbered past the original clause ids."""
    clauses = list(conv.formula.clauses)
    next_id = original.n_clauses + 1
    for lit in conv.forced:
        clauses.append(Clause(next_id, (lit,)))
        next_id += 1
    return Formula(original.n_vars, tuple(clauses))
