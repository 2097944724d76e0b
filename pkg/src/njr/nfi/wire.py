"""Canonical JSON encoding of wire values, effects, responses and agent steps.

The encoding is the trace line format and the input to cache keys, so it
is byte-stable: fixed field order, no whitespace, no extra fields.

    value     {"null":null} {"bool":b} {"int":n} {"float":x} {"string":s}
              {"$ref":n} {"$label":s} {"list":[...]} {"record":{...}}
    effect    {"kind":"Lookup","var":"query"}
    response  {"ok":<value>} | {"err":{"code":"ForbiddenVar","message":"..."}}
    step      an effect object; kind "Return" is Finish
"""

import json
import math
from typing import Any

from ..errors import WireFormatError
from ..host.public_api import INT_MAX, INT_MIN
from .public_api import (
    AgentStep,
    Assign,
    Call,
    Deref,
    Effect,
    EffectResponse,
    Emit,
    Err,
    ErrCode,
    Finish,
    Goto,
    IsolatedEval,
    LabelTag,
    Lookup,
    Ok,
    Ref,
    RefTag,
    Return,
    Set,
    SharedEval,
    TraceEntry,
    WireValue,
)


def canonical(obj: Any) -> str:
    """Serialize an encoded object to its canonical text."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


# =============================================================================
# Values
# =============================================================================


def encode_value(value: WireValue) -> dict:
    if value is None:
        return {"null": None}
    if isinstance(value, bool):
        return {"bool": value}
    if isinstance(value, int):
        return {"int": value}
    if isinstance(value, float):
        if not math.isfinite(value):
            raise WireFormatError(f"non-finite float {value!r} has no wire form")
        return {"float": value}
    if isinstance(value, str):
        return {"string": value}
    if isinstance(value, RefTag):
        return {"$ref": value.id}
    if isinstance(value, LabelTag):
        return {"$label": value.name}
    if isinstance(value, list):
        return {"list": [encode_value(item) for item in value]}
    if isinstance(value, dict):
        return {"record": {_key(k): encode_value(v) for k, v in value.items()}}
    raise WireFormatError(f"{type(value).__name__} is not a wire value")


def decode_value(obj: Any) -> WireValue:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise WireFormatError(f"wire value must be an object with one tag, got {obj!r}")
    tag, body = next(iter(obj.items()))
    if tag == "null":
        if body is not None:
            raise WireFormatError("null tag carries a non-null body")
        return None
    if tag == "bool":
        if not isinstance(body, bool):
            raise WireFormatError(f"bool tag carries {body!r}")
        return body
    if tag == "int":
        if isinstance(body, bool) or not isinstance(body, int) or not INT_MIN <= body <= INT_MAX:
            raise WireFormatError(f"int tag carries {body!r}")
        return body
    if tag == "float":
        if isinstance(body, bool) or not isinstance(body, (int, float)) or not math.isfinite(body):
            raise WireFormatError(f"float tag carries {body!r}")
        return float(body)
    if tag == "string":
        if not isinstance(body, str):
            raise WireFormatError(f"string tag carries {body!r}")
        return body
    if tag == "$ref":
        if isinstance(body, bool) or not isinstance(body, int) or body < 0:
            raise WireFormatError(f"$ref tag carries {body!r}")
        return RefTag(id=body)
    if tag == "$label":
        if not isinstance(body, str) or not body:
            raise WireFormatError(f"$label tag carries {body!r}")
        return LabelTag(name=body)
    if tag == "list":
        if not isinstance(body, list):
            raise WireFormatError("list tag carries a non-array body")
        return [decode_value(item) for item in body]
    if tag == "record":
        if not isinstance(body, dict):
            raise WireFormatError("record tag carries a non-object body")
        return {k: decode_value(v) for k, v in body.items()}
    raise WireFormatError(f"unknown wire tag '{tag}'")


def _key(key: Any) -> str:
    if not isinstance(key, str):
        raise WireFormatError(f"record keys are strings, got {key!r}")
    return key


def is_wire_scalar(value: Any) -> bool:
    return value is None or isinstance(value, (bool, int, float, str, RefTag, LabelTag))


# =============================================================================
# Plain JSON (tool-call arguments)
# =============================================================================


def from_plain(obj: Any) -> WireValue:
    """Read plain JSON, with ``{"$ref": n}`` and ``{"$label": s}`` tags, as a wire value."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        if not INT_MIN <= obj <= INT_MAX:
            raise WireFormatError(f"integer {obj} is out of range")
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise WireFormatError(f"non-finite float {obj!r}")
        return obj
    if isinstance(obj, list):
        return [from_plain(item) for item in obj]
    if isinstance(obj, dict):
        if set(obj) == {"$ref"}:
            return decode_value(obj)
        if set(obj) == {"$label"}:
            return decode_value(obj)
        return {_key(k): from_plain(v) for k, v in obj.items()}
    raise WireFormatError(f"{type(obj).__name__} is not JSON")


def to_plain(value: WireValue) -> Any:
    """Inverse of ``from_plain``."""
    if isinstance(value, RefTag):
        return {"$ref": value.id}
    if isinstance(value, LabelTag):
        return {"$label": value.name}
    if isinstance(value, list):
        return [to_plain(item) for item in value]
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    return value


# =============================================================================
# Effects
# =============================================================================


def encode_effect(effect: Effect) -> dict:
    if isinstance(effect, Lookup):
        return {"kind": "Lookup", "var": effect.var}
    if isinstance(effect, Assign):
        return {"kind": "Assign", "var": effect.var, "value": encode_value(effect.value)}
    if isinstance(effect, Deref):
        return {"kind": "Deref", "ref": encode_value(effect.ref)}
    if isinstance(effect, Ref):
        return {"kind": "Ref", "value": encode_value(effect.value)}
    if isinstance(effect, Set):
        return {"kind": "Set", "ref": encode_value(effect.ref), "value": encode_value(effect.value)}
    if isinstance(effect, Goto):
        encoded: dict[str, Any] = {"kind": "Goto", "label": effect.label}
        if effect.payload is not None:
            encoded["payload"] = encode_value(effect.payload)
        return encoded
    if isinstance(effect, Call):
        return {"kind": "Call", "tool": effect.tool, "arg": encode_value(effect.arg)}
    if isinstance(effect, SharedEval):
        return {"kind": "SharedEval", "src": effect.src}
    if isinstance(effect, IsolatedEval):
        return {"kind": "IsolatedEval", "src": effect.src}
    if isinstance(effect, Return):
        return {"kind": "Return", "value": encode_value(effect.value)}
    raise WireFormatError(f"{type(effect).__name__} is not an effect")


_EFFECT_FIELDS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    # kind: (required fields, optional fields)
    "Lookup": (("var",), ()),
    "Assign": (("var", "value"), ()),
    "Deref": (("ref",), ()),
    "Ref": (("value",), ()),
    "Set": (("ref", "value"), ()),
    "Goto": (("label",), ("payload",)),
    "Call": (("tool", "arg"), ()),
    "SharedEval": (("src",), ()),
    "IsolatedEval": (("src",), ()),
    "Return": (("value",), ()),
}

_TEXT_FIELDS = {"var", "label", "tool", "src"}

_EFFECT_CLASSES = {
    "Lookup": Lookup,
    "Assign": Assign,
    "Deref": Deref,
    "Ref": Ref,
    "Set": Set,
    "Goto": Goto,
    "Call": Call,
    "SharedEval": SharedEval,
    "IsolatedEval": IsolatedEval,
    "Return": Return,
}


def decode_effect(obj: Any) -> Effect:
    if not isinstance(obj, dict):
        raise WireFormatError(f"effect must be an object, got {obj!r}")
    kind = obj.get("kind")
    if kind not in _EFFECT_FIELDS:
        raise WireFormatError(f"unknown effect kind {kind!r}")
    required, optional = _EFFECT_FIELDS[kind]
    present = set(obj) - {"kind"}
    missing = set(required) - present
    extra = present - set(required) - set(optional)
    if missing or extra:
        raise WireFormatError(f"{kind} effect has missing {sorted(missing)} or extra {sorted(extra)} fields")

    fields: dict[str, Any] = {}
    for name in (*required, *optional):
        if name not in obj:
            continue
        if name in _TEXT_FIELDS:
            if not isinstance(obj[name], str):
                raise WireFormatError(f"{kind}.{name} must be a string")
            fields[name] = obj[name]
        else:
            fields[name] = decode_value(obj[name])
    return _EFFECT_CLASSES[kind](**fields)


# =============================================================================
# Responses, entries and steps
# =============================================================================


def encode_response(response: EffectResponse) -> dict:
    if isinstance(response, Ok):
        return {"ok": encode_value(response.value)}
    return {"err": {"code": response.code.value, "message": response.message}}


def decode_response(obj: Any) -> EffectResponse:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise WireFormatError(f"response must be an object with one key, got {obj!r}")
    if "ok" in obj:
        return Ok(value=decode_value(obj["ok"]))
    body = obj.get("err")
    if not isinstance(body, dict) or set(body) != {"code", "message"}:
        raise WireFormatError(f"malformed err response {obj!r}")
    try:
        code = ErrCode(body["code"])
    except ValueError:
        raise WireFormatError(f"unknown error code {body['code']!r}") from None
    if not isinstance(body["message"], str):
        raise WireFormatError("err message must be a string")
    return Err(code=code, message=body["message"])


def encode_entry(entry: TraceEntry) -> dict:
    return {"effect": encode_effect(entry.effect), "response": encode_response(entry.response)}


def decode_entry(obj: Any) -> TraceEntry:
    if not isinstance(obj, dict) or set(obj) != {"effect", "response"}:
        raise WireFormatError(f"trace entry must have exactly effect and response, got {obj!r}")
    return TraceEntry(effect=decode_effect(obj["effect"]), response=decode_response(obj["response"]))


def encode_step(step: AgentStep) -> dict:
    if isinstance(step, Finish):
        return encode_effect(Return(value=step.value))
    return encode_effect(step.effect)


def decode_step(obj: Any) -> AgentStep:
    effect = decode_effect(obj)
    if isinstance(effect, Return):
        return Finish(value=effect.value)
    return Emit(effect=effect)


def step_effect(step: AgentStep) -> Effect:
    """The effect a step performs; Finish performs Return."""
    if isinstance(step, Finish):
        return Return(value=step.value)
    return step.effect


def same_effect(left: Effect, right: Effect) -> bool:
    """Byte equality of canonical encodings (``True == 1`` does not hold here)."""
    return canonical(encode_effect(left)) == canonical(encode_effect(right))
