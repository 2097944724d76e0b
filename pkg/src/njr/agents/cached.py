"""Agent wrapper that serves steps from the trace cache."""

import logging

from ..nfi.public_api import AgentStep
from ..trace_store.cache import TraceCache, cache_key
from .public_api import Agent, AgentContext

logger = logging.getLogger("njr.agents.cached")


class CachingAgent(Agent):
    """
    Looks every context up in the cache before asking the wrapped agent.

    Hits never reach the wrapped agent, so ``invocations`` reports only
    the steps the wrapped agent computed.
    """

    def __init__(self, inner: Agent, cache: TraceCache):
        super().__init__()
        self.inner = inner
        self.cache = cache

    @property
    def invocations(self) -> int:
        return self.inner.invocations

    @invocations.setter
    def invocations(self, value: int) -> None:
        # Agent.__init__ assigns the counter; the wrapped agent owns it.
        pass

    async def step(self, ctx: AgentContext) -> AgentStep:
        key = cache_key(self.inner.fingerprint(), ctx.canonical_text())
        cached = self.cache.lookup(key)
        if cached is not None:
            logger.debug(f"Cache hit for block {ctx.block_id} step {len(ctx.history)}")
            return cached
        step = await self.inner.step(ctx)
        await self.cache.put(key, step)
        return step

    async def cancel(self) -> None:
        await self.inner.cancel()

    def fingerprint(self) -> str:
        return self.inner.fingerprint()

    async def aclose(self) -> None:
        await self.inner.aclose()
