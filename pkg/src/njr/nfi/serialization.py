"""Translation of values across the natural/formal boundary.

``serialize`` maps host values to wire values and ``reify`` maps scalar
wire values back. Composite wire payloads (lists and records) are turned
into fresh heap cells by ``materialize``, which validates the whole
payload before allocating anything.
"""

import math
from typing import Any

from ..errors import DanglingRef, HostTypeError
from ..host.heap import Heap
from ..host.public_api import INT_MAX, INT_MIN, RESERVED_LABELS, Addr, LabelName, LabelVal, type_name
from .public_api import LabelTag, RefTag, WireValue


def serialize(value: Any, heap: Heap | None = None) -> WireValue:
    """Host value to wire value. Addresses become RefTags; nothing is copied."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, LabelVal):
        return LabelTag(name=value.label.name)
    if isinstance(value, Addr):
        return RefTag(id=value.id)
    raise HostTypeError(f"{type_name(value)} has no wire form")


def serialize_cell(cell: Any) -> WireValue:
    """Shallow wire form of a heap cell's contents; nested composites stay RefTags."""
    if isinstance(cell, list):
        return [serialize(item) for item in cell]
    if isinstance(cell, dict):
        return {key: serialize(item) for key, item in cell.items()}
    return serialize(cell)


def label_for(name: str) -> LabelName:
    return RESERVED_LABELS.get(name) or LabelName(name=name)


def reify(wire: WireValue, heap: Heap) -> Any:
    """
    Scalar wire value to host value.

    Raises:
        DanglingRef: A RefTag names a dead cell.
        HostTypeError: The value is a composite payload or out of range.
    """
    check_payload(wire, heap, scalars_only=True)
    return _reify_scalar(wire)


def _reify_scalar(wire: WireValue) -> Any:
    if isinstance(wire, RefTag):
        return Addr(id=wire.id)
    if isinstance(wire, LabelTag):
        return LabelVal(label=label_for(wire.name))
    return wire


def check_payload(wire: WireValue, heap: Heap, *, scalars_only: bool = False) -> None:
    """Validate a wire value against the heap without changing anything."""
    if wire is None or isinstance(wire, (bool, str, LabelTag)):
        return
    if isinstance(wire, int):
        if not INT_MIN <= wire <= INT_MAX:
            raise HostTypeError(f"integer {wire} is out of range")
        return
    if isinstance(wire, float):
        if not math.isfinite(wire):
            raise HostTypeError("float is not finite")
        return
    if isinstance(wire, RefTag):
        if not heap.is_live(wire.id):
            raise DanglingRef(wire.id)
        return
    if scalars_only:
        raise HostTypeError(f"expected a scalar wire value, got {type(wire).__name__}")
    if isinstance(wire, list):
        for item in wire:
            check_payload(item, heap)
        return
    if isinstance(wire, dict):
        for key, item in wire.items():
            if not isinstance(key, str):
                raise HostTypeError("record keys are strings")
            check_payload(item, heap)
        return
    raise HostTypeError(f"{type(wire).__name__} is not a wire value")


def materialize(wire: WireValue, heap: Heap) -> Any:
    """Wire value to host value; composite payloads are allocated as new cells."""
    check_payload(wire, heap)
    return _build(wire, heap)


def materialize_cell(wire: WireValue, heap: Heap) -> Any:
    """Wire value to heap-cell contents (a list, a dict, or a host value)."""
    check_payload(wire, heap)
    if isinstance(wire, list):
        return [_build(item, heap) for item in wire]
    if isinstance(wire, dict):
        return {key: _build(item, heap) for key, item in wire.items()}
    return _reify_scalar(wire)


def _build(wire: WireValue, heap: Heap) -> Any:
    if isinstance(wire, list):
        return heap.alloc([_build(item, heap) for item in wire])
    if isinstance(wire, dict):
        return heap.alloc({key: _build(item, heap) for key, item in wire.items()})
    return _reify_scalar(wire)


def serialize_copy(value: Any, heap: Heap, first_new: int, _seen: frozenset[int] = frozenset()) -> WireValue:
    """
    Wire form of a value whose new cells are about to be discarded.

    Cells allocated at or after ``first_new`` are inlined as wire
    composites (a reference cell holding a scalar inlines as the scalar);
    older cells stay RefTags.
    """
    if not isinstance(value, Addr) or value.id < first_new:
        return serialize(value)
    if value.id in _seen:
        raise HostTypeError("cyclic value cannot be copied out")
    seen = _seen | {value.id}
    cell = heap.get(value)
    if isinstance(cell, list):
        return [serialize_copy(item, heap, first_new, seen) for item in cell]
    if isinstance(cell, dict):
        return {key: serialize_copy(item, heap, first_new, seen) for key, item in cell.items()}
    return serialize_copy(cell, heap, first_new, seen)
