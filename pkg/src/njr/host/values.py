"""Operations on host values: arithmetic, comparison, rendering."""

import json
import math
import re
from typing import Any

from ..errors import HostRuntimeError, HostTypeError
from .heap import Heap
from .public_api import INT_MAX, INT_MIN, Addr, LabelVal, type_name

_BARE_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

ARITHMETIC_OPS = {"+", "-", "*", "/", "//", "%"}
ORDERING_OPS = {"<", "<=", ">", ">="}
EQUALITY_OPS = {"==", "!="}


def is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_int(value: int) -> int:
    if not INT_MIN <= value <= INT_MAX:
        raise HostRuntimeError("integer overflow")
    return value


def check_float(value: float) -> float:
    if not math.isfinite(value):
        raise HostRuntimeError("float result is not finite")
    return value


def _number_result(value: int | float) -> int | float:
    if isinstance(value, int):
        return check_int(value)
    return check_float(value)


def values_equal(left: Any, right: Any) -> bool:
    """Immutables by value (Bool never equals a number), addresses by identity."""
    if isinstance(left, bool) or isinstance(right, bool):
        return isinstance(left, bool) and isinstance(right, bool) and left == right
    if is_number(left) and is_number(right):
        return left == right
    if type(left) is not type(right):
        return False
    return left == right


def binary(op: str, left: Any, right: Any) -> Any:
    """Apply a strict binary operator. ``and``/``or`` are handled by the evaluator."""
    if op in EQUALITY_OPS:
        equal = values_equal(left, right)
        return equal if op == "==" else not equal

    if op in ORDERING_OPS:
        if not (is_number(left) and is_number(right)) and not (isinstance(left, str) and isinstance(right, str)):
            raise HostTypeError(f"cannot compare {type_name(left)} and {type_name(right)}")
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right

    if op == "+" and isinstance(left, str) and isinstance(right, str):
        return left + right

    if op not in ARITHMETIC_OPS:
        raise HostTypeError(f"unknown operator '{op}'")
    if not (is_number(left) and is_number(right)):
        raise HostTypeError(f"operator '{op}' does not apply to {type_name(left)} and {type_name(right)}")

    if op == "+":
        return _number_result(left + right)
    if op == "-":
        return _number_result(left - right)
    if op == "*":
        return _number_result(left * right)
    if right == 0:
        raise HostRuntimeError("division by zero")
    if op == "/":
        return check_float(left / right)
    if op == "//":
        return _number_result(left // right)
    return _number_result(left % right)


def unary(op: str, operand: Any) -> Any:
    if op == "not":
        return not expect_bool(operand, "not")
    if not is_number(operand):
        raise HostTypeError(f"cannot negate {type_name(operand)}")
    return _number_result(-operand)


def expect_bool(value: Any, context: str) -> bool:
    if not isinstance(value, bool):
        raise HostTypeError(f"{context} expects Bool, got {type_name(value)}")
    return value


def expect_addr(value: Any, context: str) -> Addr:
    if not isinstance(value, Addr):
        raise HostTypeError(f"{context} expects a reference, got {type_name(value)}")
    return value


def render(value: Any, heap: Heap, *, nested: bool = False, _seen: frozenset[int] = frozenset()) -> str:
    """Text form used by ``print`` and ``str``."""
    if value is None:
        return "()"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False) if nested else value
    if isinstance(value, LabelVal):
        return f"@{value.label.name}"
    if isinstance(value, Addr):
        if value.id in _seen:
            return "..."
        seen = _seen | {value.id}
        cell = heap.get(value)
        if isinstance(cell, list):
            return "[" + ", ".join(render(item, heap, nested=True, _seen=seen) for item in cell) + "]"
        if isinstance(cell, dict):
            parts = [f"{_render_key(k)}: {render(v, heap, nested=True, _seen=seen)}" for k, v in cell.items()]
            return "{" + ", ".join(parts) + "}"
        return f"ref({render(cell, heap, nested=True, _seen=seen)})"
    raise HostTypeError(f"cannot render {type_name(value)}")


def _render_key(key: str) -> str:
    return key if _BARE_KEY.match(key) else json.dumps(key, ensure_ascii=False)


def to_plain(value: Any, heap: Heap, _seen: frozenset[int] = frozenset()) -> Any:
    """Deep plain-JSON rendering of a value, following references.

    Reference cells holding a scalar render as the scalar. Cycles render as "...".
    """
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, LabelVal):
        return {"$label": value.label.name}
    if isinstance(value, Addr):
        if value.id in _seen:
            return "..."
        seen = _seen | {value.id}
        cell = heap.get(value)
        if isinstance(cell, list):
            return [to_plain(item, heap, seen) for item in cell]
        if isinstance(cell, dict):
            return {k: to_plain(v, heap, seen) for k, v in cell.items()}
        return to_plain(cell, heap, seen)
    raise HostTypeError(f"cannot convert {type_name(value)}")
