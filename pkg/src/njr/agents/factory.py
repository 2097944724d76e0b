"""Builds the agent and tool registry a run is configured for."""

import logging

import httpx

from ..config import RunConfig
from ..errors import AgentError
from ..nfi.tools import ToolRegistry, standard_tools
from ..trace_store.cache import TraceCache
from .cached import CachingAgent
from .llm import LLMAgent
from .public_api import Agent
from .replay import ReplayAgent
from .scripted import ScriptedAgent

logger = logging.getLogger("njr.agents")


def build_agent(
    config: RunConfig,
    *,
    cache: TraceCache | None = None,
    client: httpx.AsyncClient | None = None,
) -> Agent:
    """
    Create the agent named by ``config.agent``.

    Args:
        config: Run configuration; supplies script/trace paths and the model.
        cache: Shared cache to wrap the agent with when ``config.cache`` is set.
            A new one is opened at ``config.cache_path`` when omitted.
        client: HTTP client for the chat-completions agent (tests pass a mock transport).

    Raises:
        AgentError: A required script or trace path is missing.
        StoreIO: The script or trace file cannot be read.
    """
    if config.agent == "scripted":
        if not config.script_path:
            raise AgentError("the scripted agent needs --script")
        agent: Agent = ScriptedAgent.from_file(config.script_path)
    elif config.agent == "replay":
        if not config.trace_path:
            raise AgentError("the replay agent needs --trace")
        agent = ReplayAgent.from_file(config.trace_path)
    else:
        agent = LLMAgent(config.model, client=client)

    if config.cache:
        agent = CachingAgent(agent, cache if cache is not None else TraceCache(config.cache_path))
    logger.debug(f"Using {config.agent} agent (cache={'on' if config.cache else 'off'}, mode={config.mode})")
    return agent


def build_tools(config: RunConfig) -> ToolRegistry | None:
    """Tool registry for tool-use mode; other modes get none."""
    if config.mode == "tools":
        return standard_tools()
    return None
