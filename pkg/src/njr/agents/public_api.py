"""Public API for agents.

An agent is the natural-code evaluation function: given the context of a
session it produces the next step. This module defines the context it
sees, the scripted-agent data model and the Agent ABC. Implementation
modules import from here, not the other way around.
"""

from abc import ABC, abstractmethod

from pydantic import BaseModel, Field

from ..nfi.public_api import AgentStep, Err, HandlerMode, TraceEntry, WireValue
from ..nfi.tools import ToolSpec
from ..nfi.wire import canonical, encode_entry, encode_response, encode_value

# =============================================================================
# Context
# =============================================================================


class EagerVar(BaseModel):
    """An input variable loaded into the agent's first context."""

    name: str
    type: str  # host type name; "Record"/"List"/"Ref" for addresses
    value: WireValue = None
    preview: str | None = None  # shallow description of a composite


class AgentContext(BaseModel):
    """Everything an agent is shown before producing a step."""

    block_id: str
    block_text: str
    session: int = 0  # index of the session within the run
    mode: HandlerMode = HandlerMode.SHARED
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    eager_vars: list[EagerVar] = Field(default_factory=list)
    labels: list[str] = Field(default_factory=list)
    tools: list[ToolSpec] = Field(default_factory=list)
    history: list[TraceEntry] = Field(default_factory=list)
    feedback: Err | None = None  # format error from the previous attempt; not part of the trace

    def haystack(self) -> str:
        """Canonical text of the eager values and every prior response."""
        parts = [canonical([var.name, encode_value(var.value), var.preview]) for var in self.eager_vars]
        parts.extend(canonical(encode_response(entry.response)) for entry in self.history)
        return "\n".join(parts)

    def canonical_text(self) -> str:
        """Canonical text of the context, minus the session index."""
        return canonical(
            {
                "block_id": self.block_id,
                "block_text": self.block_text,
                "mode": self.mode.value,
                "inputs": list(self.inputs),
                "outputs": list(self.outputs),
                "eager_vars": [
                    {"name": v.name, "type": v.type, "value": encode_value(v.value), "preview": v.preview}
                    for v in self.eager_vars
                ],
                "labels": self.labels,
                "tools": [t.name for t in self.tools],
                "history": [encode_entry(entry) for entry in self.history],
                "feedback": encode_response(self.feedback) if self.feedback is not None else None,
            }
        )


# =============================================================================
# Scripts
# =============================================================================


class ScriptRule(BaseModel):
    """Steps to take when ``guard`` occurs in the context's haystack (None always matches)."""

    guard: str | None = None
    steps: list[AgentStep] = Field(default_factory=list)


class Script(BaseModel):
    """Scripted-agent rules per block id, tried in order."""

    blocks: dict[str, list[ScriptRule]] = Field(default_factory=dict)


# =============================================================================
# Agent interface (ABC)
# =============================================================================


class Agent(ABC):
    """
    Abstract natural-code evaluator.

    ``invocations`` counts the steps the agent actually computed; steps
    served from elsewhere (a cache) do not count.
    """

    def __init__(self) -> None:
        self.invocations = 0

    @abstractmethod
    async def step(self, ctx: AgentContext) -> AgentStep:
        """
        Produce the next step of a session.

        Args:
            ctx: Block, eager inputs, allowed labels and tools, and the
                session's history of (effect, response) pairs.

        Returns:
            Emit(effect) to perform an effect, or Finish(value) to return.

        Raises:
            MalformedStep: The agent's output could not be read as a step.
            AgentError: The agent cannot continue.
        """
        pass

    async def cancel(self) -> None:
        """Called once when the session is abandoned. The agent is not stepped again."""
        return None

    @abstractmethod
    def fingerprint(self) -> str:
        """Digest of the agent's fixed behaviour (system prompt or script), used in cache keys."""
        pass

    async def aclose(self) -> None:
        return None
