"""Heap of reference cells."""

import copy
from typing import Any

from ..errors import DanglingRef
from .public_api import Addr


class Heap:
    """
    Address-indexed store of cells.

    A cell holds an immutable value, a list (List payload) or a dict
    (Record payload). Addresses come from a counter that starts at 0 and
    never goes back, so an address is never reused within one run.
    """

    def __init__(self) -> None:
        self._cells: dict[int, Any] = {}
        self._next = 0

    def alloc(self, payload: Any) -> Addr:
        """Store payload in a fresh cell and return its address."""
        address = self._next
        self._next += 1
        self._cells[address] = payload
        return Addr(id=address)

    def get(self, address: Addr | int) -> Any:
        """Current contents of a live cell."""
        key = _key(address)
        if key not in self._cells:
            raise DanglingRef(key)
        return self._cells[key]

    def set(self, address: Addr | int, payload: Any) -> None:
        """Overwrite a live cell in place; every holder of the address sees the change."""
        key = _key(address)
        if key not in self._cells:
            raise DanglingRef(key)
        self._cells[key] = payload

    def is_live(self, address: Addr | int) -> bool:
        return _key(address) in self._cells

    @property
    def next_address(self) -> int:
        return self._next

    def __len__(self) -> int:
        return len(self._cells)

    def snapshot(self) -> tuple[dict[int, Any], int]:
        """Deep copy of every cell plus the allocation counter."""
        return copy.deepcopy(self._cells), self._next

    def restore(self, snapshot: tuple[dict[int, Any], int]) -> None:
        cells, next_address = snapshot
        self._cells = copy.deepcopy(cells)
        self._next = next_address


def _key(address: Addr | int) -> int:
    return address.id if isinstance(address, Addr) else address
