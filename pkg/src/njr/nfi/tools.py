"""Host tools callable from natural code in tool-use mode."""

import inspect
import logging
from datetime import date
from typing import Any, Awaitable, Callable

from pydantic import BaseModel, ConfigDict

from ..errors import DuplicateTool
from .public_api import Err, ErrCode, WireValue

logger = logging.getLogger("njr.nfi.tools")

ToolFunction = Callable[[WireValue], WireValue | Err | Awaitable[WireValue | Err]]
"""A tool takes one wire value and returns a wire value, or an Err response."""


class ToolSpec(BaseModel):
    """What an agent is told about a tool."""

    model_config = ConfigDict(frozen=True)

    name: str
    description: str


class ToolRegistry:
    """Named host functions with one-line descriptions. Names are unique."""

    def __init__(self) -> None:
        self._tools: dict[str, tuple[ToolSpec, ToolFunction]] = {}

    def register(self, name: str, description: str, fn: ToolFunction) -> None:
        if name in self._tools:
            raise DuplicateTool(f"tool '{name}' is already registered")
        self._tools[name] = (ToolSpec(name=name, description=description), fn)
        logger.debug(f"Registered tool {name}")

    def __contains__(self, name: object) -> bool:
        return name in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._tools.values()]

    async def call(self, name: str, arg: WireValue) -> WireValue | Err:
        """Apply a tool. Unknown tools and tool failures come back as Err."""
        if name not in self._tools:
            return Err(code=ErrCode.TYPE_ERROR, message=f"unknown tool '{name}'")
        _, fn = self._tools[name]
        try:
            result = fn(arg)
            if inspect.isawaitable(result):
                result = await result
        except Exception as e:
            logger.warning(f"Tool {name} failed: {e}")
            return Err(code=ErrCode.EVAL_ERROR, message=f"tool '{name}' failed: {e}")
        return result


def register_tool(registry: ToolRegistry, name: str, description: str, fn: ToolFunction) -> None:
    """Add a tool; ``Call(name, w)`` then dispatches to ``fn(w)``."""
    registry.register(name, description, fn)


# =============================================================================
# Standard tools
# =============================================================================


def _add(arg: WireValue) -> WireValue | Err:
    if not isinstance(arg, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in arg):
        return Err(code=ErrCode.TYPE_ERROR, message="add expects a list of numbers")
    return sum(arg)


def _length(arg: WireValue) -> WireValue | Err:
    if not isinstance(arg, (str, list, dict)):
        return Err(code=ErrCode.TYPE_ERROR, message="length expects a string, list or record")
    return len(arg)


def _upper(arg: WireValue) -> WireValue | Err:
    if not isinstance(arg, str):
        return Err(code=ErrCode.TYPE_ERROR, message="upper expects a string")
    return arg.upper()


def _today(arg: Any) -> WireValue:
    return date.today().isoformat()


def standard_tools() -> ToolRegistry:
    """The registry the CLI uses in tool-use mode."""
    registry = ToolRegistry()
    register_tool(registry, "add", "Sum a list of numbers.", _add)
    register_tool(registry, "length", "Length of a string, list or record.", _length)
    register_tool(registry, "upper", "Uppercase a string.", _upper)
    register_tool(registry, "today", "Today's date as YYYY-MM-DD; the argument is ignored.", _today)
    return registry
