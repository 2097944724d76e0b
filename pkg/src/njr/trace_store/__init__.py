"""Trace records, trace files and the step cache."""

from .cache import TraceCache, cache_key
from .public_api import CacheKey, TraceHeader, TraceRecord
from .recorder import parse_traces, read_traces, record, trace_lines, write_traces

__all__ = [
    # Public API
    "CacheKey",
    "TraceHeader",
    "TraceRecord",
    # Traces
    "record",
    "trace_lines",
    "write_traces",
    "read_traces",
    "parse_traces",
    # Cache
    "TraceCache",
    "cache_key",
]
