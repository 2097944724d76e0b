"""Public API for trace storage.

Defines trace records (one per natural-block session) and cache keys.
Implementation modules import from here, not the other way around.
"""

import hashlib

from pydantic import BaseModel, ConfigDict, Field

from ..nfi.public_api import Effect, TraceEntry


class TraceHeader(BaseModel):
    """Identifies the session a trace belongs to."""

    model_config = ConfigDict(frozen=True)

    program: str  # Program.digest()
    block_id: str
    mode: str
    config: str  # RunConfig.digest()
    session: int = 0  # index of the session within the run


class TraceRecord(BaseModel):
    """Ordered (effect, response) pairs of one session, plus how it ended.

    ``terminal`` is the Return or Goto that ended the session, or None when
    the session was stopped by an error.
    """

    header: TraceHeader
    entries: list[TraceEntry] = Field(default_factory=list)
    terminal: Effect | None = None


class CacheKey(BaseModel):
    """SHA-256 over the agent fingerprint and the canonical context."""

    model_config = ConfigDict(frozen=True)

    digest: str

    @classmethod
    def of(cls, fingerprint: str, context_text: str) -> "CacheKey":
        payload = f"{fingerprint}\n{context_text}".encode()
        return cls(digest=hashlib.sha256(payload).hexdigest())
