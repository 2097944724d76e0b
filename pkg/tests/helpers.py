"""Builders shared by the test modules."""

from pathlib import Path
from typing import Any, Iterable

from njr.agents.public_api import Agent, AgentContext, Script, ScriptRule
from njr.agents.scripted import ScriptedAgent
from njr.config import RunConfig
from njr.errors import AgentError
from njr.host.interpreter import Interpreter
from njr.host.parser import parse_program
from njr.host.public_api import RunResult
from njr.nfi.public_api import AgentStep, Effect, Emit, Finish, Return

SUITES = Path(__file__).resolve().parents[1] / "suites"
GRAPH_SUITE = SUITES / "graph"
BASICS_SUITE = SUITES / "basics"


def as_step(effect: Effect) -> AgentStep:
    """Agent step performing ``effect``; a Return becomes Finish."""
    if isinstance(effect, Return):
        return Finish(value=effect.value)
    return Emit(effect=effect)


def scripted(block_id: str, *rules: tuple[str | None, list[Effect]]) -> ScriptedAgent:
    """Scripted agent for one block from (guard, effects) pairs."""
    parsed = [ScriptRule(guard=guard, steps=[as_step(e) for e in effects]) for guard, effects in rules]
    return ScriptedAgent(Script(blocks={block_id: parsed}))


def only_block(source: str) -> str:
    """Id of the single natural block in ``source``."""
    (block_id,) = parse_program(source).blocks
    return block_id


def interpreter(
    source: str,
    agent: Agent | None = None,
    *,
    stdin: Iterable[str] = (),
    tools: Any = None,
    **config: Any,
) -> Interpreter:
    return Interpreter(parse_program(source), stdin=list(stdin), agent=agent, config=RunConfig(**config), tools=tools)


async def run_source(
    source: str,
    agent: Agent | None = None,
    *,
    stdin: Iterable[str] = (),
    tools: Any = None,
    **config: Any,
) -> RunResult:
    """Parse and run ``source``; keyword arguments become RunConfig fields."""
    return await interpreter(source, agent, stdin=stdin, tools=tools, **config).run()


class ListAgent(Agent):
    """Hands out a fixed list of effects in order, whatever the context says."""

    def __init__(self, effects: list[Effect], name: str = "list"):
        super().__init__()
        self.steps = [as_step(e) for e in effects]
        self.contexts: list[AgentContext] = []
        self.cancelled = 0
        self.name = name

    async def step(self, ctx: AgentContext) -> AgentStep:
        self.contexts.append(ctx)
        self.invocations += 1
        if self.invocations > len(self.steps):
            raise AgentError("list agent has no more steps")
        return self.steps[self.invocations - 1]

    async def cancel(self) -> None:
        self.cancelled += 1

    def fingerprint(self) -> str:
        return self.name
