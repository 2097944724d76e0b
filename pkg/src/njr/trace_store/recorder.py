"""Trace records and the JSON Lines trace file.

A trace file holds one group per session:

    {"header":{"program":"...","block_id":"3:5","mode":"shared","config":"...","session":0}}
    {"effect":{...},"response":{...}}
    ...
    {"terminal":{...}}            (absent when the session ended in an error)
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable

from ..errors import StoreIO, WireFormatError
from ..nfi.session import Session
from ..nfi.wire import canonical, decode_effect, decode_entry, encode_effect, encode_entry
from .public_api import TraceHeader, TraceRecord

logger = logging.getLogger("njr.trace_store")


def record(session: Session) -> TraceRecord:
    """Snapshot a session's trace."""
    return TraceRecord(
        header=TraceHeader(
            program=session.program_digest,
            block_id=session.block.block_id,
            mode=session.mode.value,
            config=session.config_digest,
            session=session.index,
        ),
        entries=list(session.entries),
        terminal=session.terminal,
    )


def _encode_header(header: TraceHeader) -> dict:
    return {
        "program": header.program,
        "block_id": header.block_id,
        "mode": header.mode,
        "config": header.config,
        "session": header.session,
    }


def trace_lines(records: Iterable[TraceRecord]) -> list[str]:
    """Canonical lines for a sequence of records."""
    lines = []
    for rec in records:
        lines.append(canonical({"header": _encode_header(rec.header)}))
        lines.extend(canonical(encode_entry(entry)) for entry in rec.entries)
        if rec.terminal is not None:
            lines.append(canonical({"terminal": encode_effect(rec.terminal)}))
    return lines


def write_traces(path: str | Path, records: Iterable[TraceRecord]) -> None:
    lines = trace_lines(records)
    try:
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    except OSError as e:
        raise StoreIO(f"cannot write trace file {path}: {e}") from e
    logger.info(f"Wrote {len(lines)} trace line(s) to {path}")


def parse_traces(text: str, source: str = "<trace>") -> list[TraceRecord]:
    """Parse trace-file text into records."""
    records: list[TraceRecord] = []
    current: dict[str, Any] | None = None

    def flush() -> None:
        if current is not None:
            records.append(TraceRecord(**current))

    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise WireFormatError("line is not an object")
            if set(obj) == {"header"}:
                flush()
                current = {"header": TraceHeader(**obj["header"]), "entries": [], "terminal": None}
            elif current is None:
                raise WireFormatError("entry before the first header")
            elif current["terminal"] is not None:
                raise WireFormatError("line after the session's terminal")
            elif set(obj) == {"terminal"}:
                current["terminal"] = decode_effect(obj["terminal"])
            else:
                current["entries"].append(decode_entry(obj))
        except (ValueError, TypeError, WireFormatError) as e:
            raise StoreIO(f"{source}:{number}: malformed trace line: {e}") from e
    flush()
    return records


def read_traces(path: str | Path) -> list[TraceRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StoreIO(f"cannot read trace file {path}: {e}") from e
    return parse_traces(text, str(path))
