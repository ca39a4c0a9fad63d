"""Exactly-1 3SAT scan solver, its Petri-net semantics, and a checking harness."""

__version__ = "0.1.0"
