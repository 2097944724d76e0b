"""Chat-completions agent with tool calling."""

import asyncio
import hashlib
import logging

import httpx

from ..config import settings
from ..errors import AgentError, MalformedStep
from ..nfi.public_api import AgentStep
from .prompts import PromptTemplate, build_messages, call_to_step, load_template, tool_definitions
from .public_api import Agent, AgentContext

logger = logging.getLogger("njr.agents.llm")

_RETRY_STATUS = {429, 500, 502, 503, 504}


class LLMAgent(Agent):
    """
    Asks a chat-completions endpoint for one tool call per step.

    The transcript is rebuilt from the context on every step, so the agent
    holds no per-session state and one client can serve many sessions.
    """

    def __init__(
        self,
        model: str | None = None,
        *,
        client: httpx.AsyncClient | None = None,
        template: PromptTemplate | None = None,
        max_retries: int | None = None,
        backoff_seconds: float | None = None,
    ):
        super().__init__()
        self.model = model or settings.model
        self.template = template or load_template()
        self.max_retries = max_retries if max_retries is not None else settings.llm_max_retries
        self.backoff_seconds = backoff_seconds if backoff_seconds is not None else settings.llm_backoff_seconds
        self._owns_client = client is None
        self._client = client or httpx.AsyncClient(
            base_url=settings.llm_base_url,
            headers={"Authorization": f"Bearer {settings.llm_api_key}"},
            timeout=settings.llm_timeout_seconds,
        )
        self._fingerprint = hashlib.sha256(f"{self.model}\n{self.template.digest()}".encode()).hexdigest()

    async def _post_with_retry(self, payload: dict) -> dict:
        """POST with retry on transport errors and 429/5xx, backing off 1s, 2s, 4s..."""
        last_error = ""
        for attempt in range(self.max_retries):
            try:
                response = await self._client.post("/chat/completions", json=payload)
            except httpx.TransportError as e:
                last_error = f"transport error: {e}"
            else:
                if response.status_code not in _RETRY_STATUS:
                    if response.is_error:
                        raise AgentError(f"chat endpoint answered {response.status_code}: {response.text[:200]}")
                    try:
                        return response.json()
                    except ValueError as e:
                        raise MalformedStep(f"chat endpoint returned invalid JSON: {e}") from e
                last_error = f"status {response.status_code}"
            if attempt + 1 < self.max_retries:
                delay = self.backoff_seconds * 2**attempt
                logger.warning(
                    f"Chat endpoint {last_error}, retrying in {delay}s (attempt {attempt + 1}/{self.max_retries})"
                )
                await asyncio.sleep(delay)
        raise AgentError(f"chat endpoint failed after {self.max_retries} attempt(s): {last_error}")

    async def step(self, ctx: AgentContext) -> AgentStep:
        payload = {
            "model": self.model,
            "messages": build_messages(self.template, ctx),
            "tools": tool_definitions(self.template, ctx),
            "tool_choice": "required",
        }
        self.invocations += 1
        data = await self._post_with_retry(payload)
        try:
            message = data["choices"][0]["message"]
        except (KeyError, IndexError, TypeError) as e:
            raise MalformedStep(f"reply has no message: {e}") from e
        tool_calls = message.get("tool_calls") or []
        if not tool_calls:
            raise MalformedStep("reply has no tool call")
        if len(tool_calls) > 1:
            logger.warning(f"Block {ctx.block_id}: reply has {len(tool_calls)} tool calls, using the first")
        function = tool_calls[0].get("function") or {}
        step = call_to_step(function.get("name", ""), function.get("arguments", ""), ctx)
        logger.debug(f"Block {ctx.block_id} step {len(ctx.history)}: {function.get('name')}")
        return step

    def fingerprint(self) -> str:
        return self._fingerprint

    async def aclose(self) -> None:
        if self._owns_client:
            await self._client.aclose()
