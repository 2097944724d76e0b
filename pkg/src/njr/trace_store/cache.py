"""Step cache keyed on trace-prefix history.

The store is an append-only JSON Lines file of ``{"key": ..., "step": ...}``
lines with an in-memory index. Reads go to the index; appends are
serialized by a lock. An entry is never rewritten once stored.
"""

import asyncio
import json
import logging
from pathlib import Path

from ..errors import StoreIO, WireFormatError
from ..nfi.public_api import AgentStep
from ..nfi.wire import canonical, decode_step, encode_step
from .public_api import CacheKey

logger = logging.getLogger("njr.trace_store")


def cache_key(fingerprint: str, context_text: str) -> CacheKey:
    """Key over the agent fingerprint and the canonical agent context (block, eager values, history)."""
    return CacheKey.of(fingerprint, context_text)


class TraceCache:
    """File-backed map from CacheKey to AgentStep."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._index: dict[str, AgentStep] = {}
        self._lock = asyncio.Lock()
        self.hits = 0
        self.misses = 0
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        try:
            text = self.path.read_text(encoding="utf-8")
        except OSError as e:
            raise StoreIO(f"cannot read cache {self.path}: {e}") from e
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                self._index.setdefault(obj["key"], decode_step(obj["step"]))
            except (ValueError, KeyError, TypeError, WireFormatError) as e:
                raise StoreIO(f"{self.path}:{number}: malformed cache line: {e}") from e
        logger.info(f"Loaded {len(self._index)} cached step(s) from {self.path}")

    def __len__(self) -> int:
        return len(self._index)

    def lookup(self, key: CacheKey) -> AgentStep | None:
        step = self._index.get(key.digest)
        if step is None:
            self.misses += 1
        else:
            self.hits += 1
        return step

    async def put(self, key: CacheKey, step: AgentStep) -> None:
        async with self._lock:
            if key.digest in self._index:
                return
            line = canonical({"key": key.digest, "step": encode_step(step)})
            try:
                with self.path.open("a", encoding="utf-8") as f:
                    f.write(line + "\n")
            except OSError as e:
                raise StoreIO(f"cannot append to cache {self.path}: {e}") from e
            self._index[key.digest] = step
