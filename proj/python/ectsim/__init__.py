"""Deterministic message-passing concurrency simulator.

Parse small CSP-style programs, execute them under controlled scheduling
policies, record execution-concurrency traces, and analyze the traces for
leaks, deadlock cycles, happens-before order, and synchronization coverage.
"""

from ._ectsim import (
    CoverageSet,
    Program,
    TraceBundle,
    coverage,
    deadlock_cycles,
    detect_leaks,
    export_dot,
    export_shiviz,
    fuzz,
    growth_curve,
    happens_before,
    lane_view,
    lint,
    load_trace,
    merge_coverage,
    parse,
    pretty_print,
    run,
    save_trace,
)

__all__ = [
    "CoverageSet",
    "Program",
    "TraceBundle",
    "coverage",
    "deadlock_cycles",
    "detect_leaks",
    "export_dot",
    "export_shiviz",
    "fuzz",
    "growth_curve",
    "happens_before",
    "lane_view",
    "lint",
    "load_trace",
    "merge_coverage",
    "parse",
    "pretty_print",
    "run",
    "save_trace",
]
