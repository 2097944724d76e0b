"""A suspended natural-code evaluation."""

from enum import Enum
from typing import Any

from ..host.env import Frame
from ..host.public_api import LabelName, NaturalBlock
from .public_api import Effect, EffectResponse, HandlerMode, TraceEntry


class SessionStatus(str, Enum):
    RUNNING = "running"
    FINISHED = "finished"
    CANCELLED = "cancelled"


class Session:
    """
    One natural block's conversation with its agent.

    ``frame`` is the block frame pushed at entry: Assign binds there, and
    output variables are copied to the enclosing frame when the block
    completes. ``agent_steps`` counts calls to the agent's step function.
    """

    def __init__(
        self,
        *,
        agent: Any,
        block: NaturalBlock,
        mode: HandlerMode,
        labels: tuple[LabelName, ...],
        frame: Frame,
        index: int = 0,
        program_digest: str = "",
        config_digest: str = "",
    ):
        self.agent = agent
        self.block = block
        self.mode = mode
        self.inputs = frozenset(block.inputs)
        self.outputs = frozenset(block.outputs)
        self.labels = labels
        self.frame = frame
        self.index = index
        self.program_digest = program_digest
        self.config_digest = config_digest

        self.entries: list[TraceEntry] = []
        self.terminal: Effect | None = None
        self.effects_used = 0
        self.agent_steps = 0
        self.finalize_failures = 0
        self.status = SessionStatus.RUNNING

    @property
    def running(self) -> bool:
        return self.status == SessionStatus.RUNNING

    def label(self, name: str) -> LabelName | None:
        for label in self.labels:
            if label.name == name:
                return label
        return None

    def append(self, effect: Effect, response: EffectResponse) -> TraceEntry:
        entry = TraceEntry(effect=effect, response=response)
        self.entries.append(entry)
        return entry

    def finish(self, terminal: Effect) -> None:
        self.terminal = terminal
        self.status = SessionStatus.FINISHED

    def cancel(self, terminal: Effect | None = None) -> None:
        self.terminal = terminal
        self.status = SessionStatus.CANCELLED
