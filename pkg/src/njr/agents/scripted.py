"""Deterministic scripted agent.

A script maps block ids to ordered rules. A rule is usable at step k when
its first k steps are exactly the effects the session has performed so
far; the first usable rule whose guard occurs in the context's haystack
supplies step k. Rules sharing a prefix (typically a ``Lookup``) let a
script branch on what the lookup returned, with or without eager loading.

Script file (``.agent.json``)::

    {"blocks": {"7:5": [{"guard": "Exit, please.",
                         "steps": [{"kind": "Lookup", "var": "query"},
                                   {"kind": "Goto", "label": "break"}]}]}}
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any

from ..errors import NoRule, StoreIO, WireFormatError
from ..nfi.public_api import AgentStep
from ..nfi.wire import canonical, decode_step, encode_step, same_effect, step_effect
from .public_api import Agent, AgentContext, Script, ScriptRule

logger = logging.getLogger("njr.agents.scripted")


def parse_script(data: Any) -> Script:
    """Build a Script from its JSON form."""
    if not isinstance(data, dict) or not isinstance(data.get("blocks"), dict):
        raise WireFormatError("script must be an object with a 'blocks' object")
    blocks: dict[str, list[ScriptRule]] = {}
    for block_id, rules in data["blocks"].items():
        if not isinstance(rules, list):
            raise WireFormatError(f"rules for block {block_id} must be a list")
        parsed = []
        for rule in rules:
            if not isinstance(rule, dict) or not isinstance(rule.get("steps"), list):
                raise WireFormatError(f"rule for block {block_id} needs a 'steps' list")
            guard = rule.get("guard")
            if guard is not None and not isinstance(guard, str):
                raise WireFormatError(f"guard for block {block_id} must be a string or null")
            parsed.append(ScriptRule(guard=guard, steps=[decode_step(step) for step in rule["steps"]]))
        blocks[block_id] = parsed
    return Script(blocks=blocks)


def encode_script(script: Script) -> dict:
    return {
        "blocks": {
            block_id: [{"guard": rule.guard, "steps": [encode_step(s) for s in rule.steps]} for rule in rules]
            for block_id, rules in script.blocks.items()
        }
    }


def load_script(path: str | Path) -> Script:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise StoreIO(f"cannot read script {path}: {e}") from e
    return parse_script(data)


def _follows(rule: ScriptRule, ctx: AgentContext) -> bool:
    done = [entry.effect for entry in ctx.history]
    if len(rule.steps) <= len(done):
        return False
    return all(same_effect(step_effect(step), effect) for step, effect in zip(rule.steps, done))


def scripted_next(script: Script, ctx: AgentContext) -> AgentStep:
    """
    The script's step for this context.

    Raises:
        NoRule: No usable rule's guard matches.
    """
    haystack = ctx.haystack()
    for rule in script.blocks.get(ctx.block_id, []):
        if not _follows(rule, ctx):
            continue
        if rule.guard is None or rule.guard in haystack:
            return rule.steps[len(ctx.history)]
    raise NoRule(f"no script rule for block {ctx.block_id} at step {len(ctx.history)}")


class ScriptedAgent(Agent):
    """Replays hand-written steps chosen by guards. Same context, same step."""

    def __init__(self, script: Script):
        super().__init__()
        self.script = script
        self._fingerprint = hashlib.sha256(canonical(encode_script(script)).encode()).hexdigest()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedAgent":
        return cls(load_script(path))

    async def step(self, ctx: AgentContext) -> AgentStep:
        self.invocations += 1
        step = scripted_next(self.script, ctx)
        logger.debug(f"Block {ctx.block_id} step {len(ctx.history)}: {canonical(encode_step(step))}")
        return step

    def fingerprint(self) -> str:
        return self._fingerprint
