"""Agents that evaluate natural blocks: scripted, replay and chat-completions."""

from .cached import CachingAgent
from .eager import build_eager_context
from .factory import build_agent, build_tools
from .llm import LLMAgent
from .public_api import Agent, AgentContext, EagerVar, Script, ScriptRule
from .replay import ReplayAgent, replay_next
from .scripted import ScriptedAgent, load_script, parse_script, scripted_next

__all__ = [
    # Public API
    "Agent",
    "AgentContext",
    "EagerVar",
    "Script",
    "ScriptRule",
    # Agents
    "ScriptedAgent",
    "ReplayAgent",
    "LLMAgent",
    "CachingAgent",
    # Operations
    "build_eager_context",
    "build_agent",
    "build_tools",
    "scripted_next",
    "replay_next",
    "load_script",
    "parse_script",
]
