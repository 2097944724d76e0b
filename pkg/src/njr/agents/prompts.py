"""Chat transcripts and tool definitions for the chat-completions agent.

Each effect kind is offered as its own tool (lookup, assign, deref, ref,
set, goto, eval, done); in tool-use mode the registered tools replace the
state effects. History entries are replayed as tool-call / tool-result
pairs with the response in canonical wire JSON.
"""

import hashlib
import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ValidationError

from ..config import settings
from ..errors import MalformedStep, StoreIO, WireFormatError
from ..nfi.public_api import (
    AgentStep,
    Assign,
    Call,
    Deref,
    Effect,
    Emit,
    Finish,
    Goto,
    HandlerMode,
    IsolatedEval,
    Lookup,
    Ref,
    Set,
    SharedEval,
)
from ..nfi.wire import canonical, encode_response, from_plain, to_plain
from .public_api import AgentContext

DEFAULT_TEMPLATE_PATH = Path(__file__).with_name("prompts.yaml")

_ANY = {"description": "Any JSON value; {\"$ref\": n} for references, {\"$label\": name} for labels."}

MODE_TOOLS: dict[HandlerMode, tuple[str, ...]] = {
    HandlerMode.SHARED: ("lookup", "assign", "deref", "ref", "set", "goto", "eval", "done"),
    HandlerMode.TOOLS: ("done",),
    HandlerMode.ISOLATED: ("eval", "done"),
}


class PromptTemplate(BaseModel):
    """The YAML prompt template."""

    system: str
    mode_rules: dict[str, str]
    block: str
    eager_header: str
    feedback: str
    tools: dict[str, str]

    def digest(self) -> str:
        return hashlib.sha256(canonical(self.model_dump()).encode()).hexdigest()


def load_template(path: str | Path | None = None) -> PromptTemplate:
    """Load the template; defaults to NJR_PROMPT_TEMPLATE_PATH, then the packaged one."""
    path = Path(path or settings.prompt_template_path or DEFAULT_TEMPLATE_PATH)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        return PromptTemplate(**data)
    except (OSError, yaml.YAMLError, TypeError, ValidationError) as e:
        raise StoreIO(f"cannot load prompt template {path}: {e}") from e


# =============================================================================
# Tools
# =============================================================================


def _function(name: str, description: str, properties: dict[str, Any], required: list[str]) -> dict:
    return {
        "type": "function",
        "function": {
            "name": name,
            "description": description,
            "parameters": {"type": "object", "properties": properties, "required": required},
        },
    }


def tool_definitions(template: PromptTemplate, ctx: AgentContext) -> list[dict]:
    """OpenAI-style tool list for the context's mode."""
    describe = template.tools
    string = {"type": "string"}
    schemas: dict[str, tuple[dict[str, Any], list[str]]] = {
        "lookup": ({"var": {**string, "enum": list(ctx.inputs)} if ctx.inputs else string}, ["var"]),
        "assign": ({"var": string, "value": _ANY}, ["var", "value"]),
        "deref": ({"ref": _ANY}, ["ref"]),
        "ref": ({"value": _ANY}, ["value"]),
        "set": ({"ref": _ANY, "value": _ANY}, ["ref", "value"]),
        "goto": ({"label": {**string, "enum": list(ctx.labels)}, "payload": _ANY}, ["label"]),
        "eval": ({"src": string}, ["src"]),
        "done": ({"value": _ANY}, []),
    }
    definitions = []
    for name in MODE_TOOLS[ctx.mode]:
        properties, required = schemas[name]
        definitions.append(_function(name, describe.get(name, name), properties, required))
    if ctx.mode == HandlerMode.TOOLS:
        for spec in ctx.tools:
            definitions.append(_function(spec.name, spec.description, {"arg": _ANY}, []))
    return definitions


def effect_to_call(effect: Effect) -> tuple[str, dict[str, Any]]:
    """Tool name and arguments that would have produced an effect."""
    if isinstance(effect, Lookup):
        return "lookup", {"var": effect.var}
    if isinstance(effect, Assign):
        return "assign", {"var": effect.var, "value": to_plain(effect.value)}
    if isinstance(effect, Deref):
        return "deref", {"ref": to_plain(effect.ref)}
    if isinstance(effect, Ref):
        return "ref", {"value": to_plain(effect.value)}
    if isinstance(effect, Set):
        return "set", {"ref": to_plain(effect.ref), "value": to_plain(effect.value)}
    if isinstance(effect, Goto):
        args: dict[str, Any] = {"label": effect.label}
        if effect.payload is not None:
            args["payload"] = to_plain(effect.payload)
        return "goto", args
    if isinstance(effect, (SharedEval, IsolatedEval)):
        return "eval", {"src": effect.src}
    if isinstance(effect, Call):
        return effect.tool, {"arg": to_plain(effect.arg)}
    return "done", {"value": to_plain(effect.value)}


def call_to_step(name: str, arguments: str, ctx: AgentContext) -> AgentStep:
    """
    Read a tool call as a step of the context's mode.

    Raises:
        MalformedStep: Unknown tool, bad JSON or missing arguments.
    """
    try:
        args = json.loads(arguments or "{}")
    except ValueError as e:
        raise MalformedStep(f"arguments of '{name}' are not JSON: {e}") from e
    if not isinstance(args, dict):
        raise MalformedStep(f"arguments of '{name}' must be an object")

    tool_names = {spec.name for spec in ctx.tools} if ctx.mode == HandlerMode.TOOLS else set()
    if name not in MODE_TOOLS[ctx.mode] and name not in tool_names:
        raise MalformedStep(f"unknown tool '{name}'")

    def text(key: str) -> str:
        value = args.get(key)
        if not isinstance(value, str):
            raise MalformedStep(f"'{name}' needs a string '{key}'")
        return value

    def value(key: str, required: bool = True) -> Any:
        if key not in args:
            if required:
                raise MalformedStep(f"'{name}' needs '{key}'")
            return None
        try:
            return from_plain(args[key])
        except WireFormatError as e:
            raise MalformedStep(f"'{name}' {key}: {e.message}") from e

    if name in tool_names:
        return Emit(effect=Call(tool=name, arg=value("arg", required=False)))
    if name == "lookup":
        return Emit(effect=Lookup(var=text("var")))
    if name == "assign":
        return Emit(effect=Assign(var=text("var"), value=value("value")))
    if name == "deref":
        return Emit(effect=Deref(ref=value("ref")))
    if name == "ref":
        return Emit(effect=Ref(value=value("value")))
    if name == "set":
        return Emit(effect=Set(ref=value("ref"), value=value("value")))
    if name == "goto":
        return Emit(effect=Goto(label=text("label"), payload=value("payload", required=False)))
    if name == "eval":
        if ctx.mode == HandlerMode.ISOLATED:
            return Emit(effect=IsolatedEval(src=text("src")))
        return Emit(effect=SharedEval(src=text("src")))
    return Finish(value=value("value", required=False))


# =============================================================================
# Messages
# =============================================================================


def system_prompt(template: PromptTemplate, mode: HandlerMode) -> str:
    return template.system.format(mode_rules=template.mode_rules.get(mode.value, "").strip())


def block_message(template: PromptTemplate, ctx: AgentContext) -> str:
    eager = ""
    if ctx.eager_vars:
        lines = [template.eager_header]
        for var in ctx.eager_vars:
            shown = json.dumps(to_plain(var.value), ensure_ascii=False)
            suffix = f" {var.preview}" if var.preview else ""
            lines.append(f"- {var.name}: {var.type} = {shown}{suffix}")
        eager = "\n".join(lines)
    return template.block.format(
        block_id=ctx.block_id,
        block_text=ctx.block_text,
        inputs=", ".join(ctx.inputs) or "(none)",
        outputs=", ".join(ctx.outputs) or "(none)",
        labels=", ".join(ctx.labels) or "(none)",
        eager=eager,
    ).strip()


def build_messages(template: PromptTemplate, ctx: AgentContext) -> list[dict]:
    """The full chat transcript for the next step."""
    messages: list[dict] = [
        {"role": "system", "content": system_prompt(template, ctx.mode)},
        {"role": "user", "content": block_message(template, ctx)},
    ]
    for position, entry in enumerate(ctx.history):
        name, args = effect_to_call(entry.effect)
        call_id = f"call_{position}"
        messages.append(
            {
                "role": "assistant",
                "content": None,
                "tool_calls": [
                    {
                        "id": call_id,
                        "type": "function",
                        "function": {"name": name, "arguments": json.dumps(args, ensure_ascii=False)},
                    }
                ],
            }
        )
        content = canonical(encode_response(entry.response))
        messages.append({"role": "tool", "tool_call_id": call_id, "content": content})
    if ctx.feedback is not None:
        messages.append({"role": "user", "content": template.feedback.format(message=ctx.feedback.message).strip()})
    return messages
