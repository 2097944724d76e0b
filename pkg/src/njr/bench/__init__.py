"""Bench harness: suites of programs with assertions, pass-rate reports."""

from .assertions import check, count_passing, load_assertions
from .harness import aggregate, discover, format_table, run_program, run_suite, write_report
from .public_api import (
    Assertion,
    BenchAggregate,
    BenchReport,
    FinalVarEquals,
    HeapPathEquals,
    ProgramRow,
    RepeatResult,
    StdoutContains,
    SuiteProgram,
)

__all__ = [
    # Public API - Assertions
    "Assertion",
    "StdoutContains",
    "FinalVarEquals",
    "HeapPathEquals",
    # Public API - Report
    "SuiteProgram",
    "RepeatResult",
    "ProgramRow",
    "BenchAggregate",
    "BenchReport",
    # Operations
    "discover",
    "run_program",
    "run_suite",
    "aggregate",
    "format_table",
    "write_report",
    "load_assertions",
    "check",
    "count_passing",
]
