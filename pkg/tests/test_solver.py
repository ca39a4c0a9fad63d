"""End-to-end scan loop tests: frozen golden traces plus safety properties."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from x1scan.formula import evaluate_exactly1, formula
from x1scan.solver import (
    ScanOptions,
    extract_assignment,
    scan,
    verdict_as_dict,
)
from x1scan.reduction import discard, init_state

GOLDEN = formula(3, [[1, -3], [1, -2, 3], [2, -3]])

# full event log of the golden run: three discards, settling x1, x3, x2
GOLDEN_EVENTS = [
    {"round": 1, "kind": "conjunct_added", "clause": None, "literals": [-1]},
    {"round": 1, "kind": "two_to_unit", "clause": 1, "literals": [-3]},
    {"round": 1, "kind": "three_to_two", "clause": 2, "literals": [1]},
    {"round": 1, "kind": "conjunct_added", "clause": 1, "literals": [-3]},
    {"round": 1, "kind": "literal_discarded", "clause": None, "literals": [1]},
    {"round": 2, "kind": "clause_to_conjunction", "clause": 3, "literals": [-2]},
    {"round": 2, "kind": "conjunct_added", "clause": 3, "literals": [-2]},
    {"round": 2, "kind": "two_to_unit", "clause": 2, "literals": [-2]},
    {"round": 2, "kind": "literal_discarded", "clause": None, "literals": [3]},
    {"round": 3, "kind": "literal_discarded", "clause": None, "literals": [2]},
]


def brute_sat(f):
    for bits in itertools.product([False, True], repeat=f.n_vars):
        a = {v: bits[v - 1] for v in range(1, f.n_vars + 1)}
        if all(sum(1 for l in c.lits if (l > 0) == a[abs(l)]) == 1 for c in f.clauses):
            return a
    return None


class TestGoldenRun:
    def test_verdict(self):
        v = scan(GOLDEN)
        assert v.status == "sat"
        assert v.assignment == {1: False, 2: False, 3: False}
        assert v.rounds == 4
        assert v.verification == {"passed": True, "failed": []}

    def test_event_log(self):
        assert scan(GOLDEN).trace["events"] == GOLDEN_EVENTS

    def test_discard_sequence(self):
        v = scan(GOLDEN)
        assert v.trace["discards"] == [
            {"round": 1, "literal": 1, "via": "incompatible", "source_clause": None},
            {"round": 2, "literal": 3, "via": "necessary", "source_clause": 1},
            {"round": 3, "literal": 2, "via": "necessary", "source_clause": 3},
        ]
        assert v.trace["completion"] == []
        assert v.trace["conversion"] is None

    def test_scope_dumps_collected_on_request(self):
        v = scan(GOLDEN, ScanOptions(trace_checks=True))
        first = v.trace["scopes"][0]
        assert first["literal"] == 1
        assert first["verdict"] == "incompatible"
        # both polarities of the conflicting variable appear in E
        assert {3, -3} <= set(first["E"])

    def test_random_order_still_solves(self):
        v = scan(GOLDEN, ScanOptions(order="random", seed=7))
        assert v.status == "sat"
        assert v.verification["passed"]


class TestUnsat:
    def test_contradictory_units(self):
        v = scan(formula(1, [[1], [-1]]))
        assert v.status == "unsat"
        assert v.assignment is None
        assert v.verification is None

    def test_forced_pair_contradiction(self):
        # discard of x1 makes both x2 and -x2 emerge as conjuncts
        v = scan(formula(2, [[1, 2], [1, -2]]))
        assert v.status == "unsat"
        assert v.rounds == 2
        assert v.trace["discards"] == [
            {"round": 1, "literal": 1, "via": "incompatible", "source_clause": None}
        ]

    def test_conversion_contradiction(self):
        # both-polarity clauses force -x2 and x2 in turn
        v = scan(formula(2, [[2, 1, -1], [-2, 1, -1]]))
        assert v.status == "unsat"
        assert v.rounds == 0
        assert v.trace["conversion"]["contradiction_var"] == 2

    def test_conversion_feeds_forced_units(self):
        # {z, x, -x} forces -z; the forced unit then participates in the scan
        f = formula(2, [[2, 1, -1], [2, -1]])
        v = scan(f)
        assert v.trace["conversion"]["forced"] == [-2]
        assert v.status == "sat"
        assert v.assignment == {1: False, 2: False}
        assert v.verification["passed"]


class TestCompletion:
    def test_disjoint_clauses_need_completion(self):
        f = formula(6, [[1, 2, 3], [4, 5, 6]])
        v = scan(f)
        assert v.status == "sat"
        assert v.trace["completion"] == [{"var": 1, "picked": 1}]
        assert v.assignment == {1: True, 2: False, 3: False, 4: True, 5: False, 6: False}
        evaluate_exactly1(f, v.assignment)

    def test_tainted_dead_end_reports_unverified(self):
        # fault injection: with scope discards ignored, the unsat pair from
        # TestUnsat dead-ends inside a completion pick instead
        v = scan(
            formula(2, [[1, 2], [1, -2]]),
            ScanOptions(ignore_incompatible_checks=True),
        )
        assert v.status == "claimed_sat_unverified"
        assert v.assignment is None
        assert v.trace["completion"] == [{"var": 1, "picked": 1}]

    def test_unsat_never_tainted(self):
        v = scan(formula(2, [[1, 2], [1, -2]]))
        assert v.status == "unsat" and v.trace["completion"] == []


class TestExtraction:
    def test_settled_and_default(self):
        state = init_state(formula(4, [[1, 2, 3]]))
        discard(state, 2)
        a = extract_assignment(state)
        assert a == {1: False, 2: False, 3: False, 4: False}

    def test_base_model_wins(self):
        state = init_state(formula(2, [[1, 2]]))
        a = extract_assignment(state, base={1: True})
        assert a == {1: True, 2: False}

    def test_empty_formula(self):
        v = scan(formula(0, []))
        assert v.status == "sat"
        assert v.assignment == {}


def lits(n):
    return st.sampled_from([l for v in range(1, n + 1) for l in (v, -v)])


def formulas(max_n=4, max_m=5):
    def build(n):
        clause = st.lists(lits(n), min_size=1, max_size=3, unique=True)
        return st.lists(clause, min_size=1, max_size=max_m).map(
            lambda rows: formula(n, rows)
        )

    return st.integers(min_value=1, max_value=max_n).flatmap(build)


class TestProperties:
    @given(formulas())
    @settings(max_examples=150, deadline=None)
    def test_verdict_invariants(self, f):
        v = scan(f)
        assert v.status in {"sat", "unsat", "claimed_sat_unverified"}
        if v.status == "sat":
            assert v.verification["passed"]
            evaluate_exactly1(f, v.assignment)  # raises on a bad model
        if v.status == "unsat":
            assert v.assignment is None
            assert v.trace["completion"] == []
        if v.status == "claimed_sat_unverified":
            assert v.assignment is None or not v.verification["passed"]

    @given(formulas())
    @settings(max_examples=60, deadline=None)
    def test_deterministic(self, f):
        assert verdict_as_dict(scan(f)) == verdict_as_dict(scan(f))

    @given(formulas(max_n=3, max_m=4))
    @settings(max_examples=40, deadline=None)
    def test_parallel_matches_sequential(self, f):
        seq = verdict_as_dict(scan(f))
        par = verdict_as_dict(scan(f, ScanOptions(parallel=3)))
        assert par == seq

    @given(formulas())
    @settings(max_examples=60, deadline=None)
    def test_monotonicity_audit_clean(self, f):
        v = scan(f, ScanOptions(audit_monotonicity=True))
        assert v.trace["monotonicity"]["violations"] == []

    @given(formulas(max_n=3, max_m=4), st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_random_order_keeps_invariants(self, f, seed):
        v = scan(f, ScanOptions(order="random", seed=seed))
        if v.status == "sat":
            assert v.verification["passed"]


class TestJson:
    def test_shape(self):
        d = verdict_as_dict(scan(GOLDEN))
        assert d["status"] == "sat"
        assert d["assignment"] == [-1, -2, -3]
        assert d["rounds"] == 4
        assert set(d["trace"]) == {
            "conversion", "events", "discards", "scopes", "completion",
            "monotonicity",
        }

    def test_trace_elision(self):
        d = verdict_as_dict(scan(GOLDEN), include_trace=False)
        assert "trace" not in d
