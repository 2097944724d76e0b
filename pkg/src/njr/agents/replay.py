"""Agent that replays a recorded trace file."""

import hashlib
import logging
from pathlib import Path

from ..errors import TraceExhausted, TraceMismatch
from ..nfi.public_api import AgentStep, Effect
from ..nfi.wire import canonical, decode_step, encode_effect, encode_response
from ..trace_store.public_api import TraceRecord
from ..trace_store.recorder import read_traces, trace_lines
from .public_api import Agent, AgentContext

logger = logging.getLogger("njr.agents.replay")


def _as_step(effect: Effect) -> AgentStep:
    return decode_step(encode_effect(effect))


def replay_next(records: list[TraceRecord], ctx: AgentContext) -> AgentStep:
    """
    The recorded step for this context.

    Every live (effect, response) pair in the session history is compared
    byte for byte with the recording before the next step is handed out.

    Raises:
        TraceMismatch: At the first divergent step.
        TraceExhausted: The recording has no step here.
    """
    if ctx.session >= len(records):
        raise TraceExhausted(f"trace has no session {ctx.session} (block {ctx.block_id})")
    recorded = records[ctx.session]
    if recorded.header.block_id != ctx.block_id:
        raise TraceMismatch(
            f"session ran block {ctx.block_id} but the trace recorded block {recorded.header.block_id}",
            ctx.session,
            0,
        )

    for position, live in enumerate(ctx.history):
        if position >= len(recorded.entries):
            raise TraceMismatch("session ran past the recorded entries", ctx.session, position)
        expected = recorded.entries[position]
        if canonical(encode_effect(live.effect)) != canonical(encode_effect(expected.effect)):
            raise TraceMismatch("live effect differs from the recording", ctx.session, position)
        live_response = canonical(encode_response(live.response))
        expected_response = canonical(encode_response(expected.response))
        if live_response != expected_response:
            raise TraceMismatch(
                f"live response {live_response} differs from recorded {expected_response}",
                ctx.session,
                position,
            )

    position = len(ctx.history)
    if position < len(recorded.entries):
        return _as_step(recorded.entries[position].effect)
    if position == len(recorded.entries) and recorded.terminal is not None:
        return _as_step(recorded.terminal)
    raise TraceExhausted(f"trace for session {ctx.session} ends at step {position}")


class ReplayAgent(Agent):
    """Hands out recorded steps; never talks to a model."""

    def __init__(self, records: list[TraceRecord]):
        super().__init__()
        self.records = records
        digest = hashlib.sha256("\n".join(trace_lines(records)).encode())
        self._fingerprint = digest.hexdigest()

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayAgent":
        records = read_traces(path)
        logger.info(f"Loaded {len(records)} recorded session(s) from {path}")
        return cls(records)

    async def step(self, ctx: AgentContext) -> AgentStep:
        self.invocations += 1
        return replay_next(self.records, ctx)

    def fingerprint(self) -> str:
        return self._fingerprint
