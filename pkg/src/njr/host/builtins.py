"""Builtin functions that need only the heap.

``print`` and ``input`` touch the run's transcript and stdin, so the
interpreter implements them; they are listed here for arity checking.
"""

from typing import Any, Callable

from ..errors import HostRuntimeError, HostTypeError
from .heap import Heap
from .public_api import Addr, type_name
from .values import check_int, is_number, render, values_equal

BUILTIN_ARITY = {
    "print": 1,
    "input": 1,
    "len": 1,
    "str": 1,
    "int": 1,
    "float": 1,
    "push": 2,
    "remove": 2,
    "keys": 1,
    "contains": 2,
}

IO_BUILTINS = {"print", "input"}


def _composite(heap: Heap, value: Any, name: str) -> list | dict:
    if isinstance(value, Addr):
        cell = heap.get(value)
        if isinstance(cell, (list, dict)):
            return cell
    raise HostTypeError(f"{name}() expects a List or Record, got {type_name(value)}")


def _list(heap: Heap, value: Any, name: str) -> list:
    cell = _composite(heap, value, name)
    if not isinstance(cell, list):
        raise HostTypeError(f"{name}() expects a List, got Record")
    return cell


def builtin_len(heap: Heap, value: Any) -> int:
    if isinstance(value, str):
        return len(value)
    return len(_composite(heap, value, "len"))


def builtin_str(heap: Heap, value: Any) -> str:
    return render(value, heap)


def builtin_int(heap: Heap, value: Any) -> int:
    if isinstance(value, bool):
        raise HostTypeError("int() does not accept Bool")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return check_int(int(value))
    if isinstance(value, str):
        try:
            return check_int(int(value.strip()))
        except ValueError:
            raise HostRuntimeError(f"int() cannot parse {value!r}") from None
    raise HostTypeError(f"int() does not accept {type_name(value)}")


def builtin_float(heap: Heap, value: Any) -> float:
    if is_number(value):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            raise HostRuntimeError(f"float() cannot parse {value!r}") from None
    raise HostTypeError(f"float() does not accept {type_name(value)}")


def builtin_push(heap: Heap, target: Any, value: Any) -> None:
    _list(heap, target, "push").append(value)


def builtin_remove(heap: Heap, target: Any, value: Any) -> bool:
    """Remove every element equal to value; true when something was removed."""
    cell = _list(heap, target, "remove")
    kept = [item for item in cell if not values_equal(item, value)]
    removed = len(kept) != len(cell)
    cell[:] = kept
    return removed


def builtin_keys(heap: Heap, target: Any) -> Addr:
    cell = _composite(heap, target, "keys")
    if not isinstance(cell, dict):
        raise HostTypeError("keys() expects a Record, got List")
    return heap.alloc(list(cell.keys()))


def builtin_contains(heap: Heap, target: Any, value: Any) -> bool:
    if isinstance(target, str):
        if not isinstance(value, str):
            raise HostTypeError(f"contains() on Str expects Str, got {type_name(value)}")
        return value in target
    cell = _composite(heap, target, "contains")
    if isinstance(cell, dict):
        return isinstance(value, str) and value in cell
    return any(values_equal(item, value) for item in cell)


PURE_BUILTINS: dict[str, Callable[..., Any]] = {
    "len": builtin_len,
    "str": builtin_str,
    "int": builtin_int,
    "float": builtin_float,
    "push": builtin_push,
    "remove": builtin_remove,
    "keys": builtin_keys,
    "contains": builtin_contains,
}
