"""Lexical scope stack."""

from dataclasses import dataclass, field
from typing import Any

from ..errors import UndefinedVar


@dataclass
class Frame:
    """One scope frame. Lookups stop after a barrier frame (a function's parameters)."""

    bindings: dict[str, Any] = field(default_factory=dict)
    barrier: bool = False


class Env:
    """Stack of frames; the bottom frame holds program-level variables."""

    def __init__(self, globals_: dict[str, Any] | None = None) -> None:
        self._frames: list[Frame] = [Frame(dict(globals_ or {}), barrier=True)]

    @property
    def depth(self) -> int:
        return len(self._frames)

    @property
    def top(self) -> Frame:
        return self._frames[-1]

    @property
    def globals(self) -> dict[str, Any]:
        return self._frames[0].bindings

    def frame(self, index: int) -> Frame:
        return self._frames[index]

    def push(self, bindings: dict[str, Any] | None = None, *, barrier: bool = False) -> Frame:
        frame = Frame(dict(bindings or {}), barrier=barrier)
        self._frames.append(frame)
        return frame

    def pop(self) -> Frame:
        if len(self._frames) == 1:
            raise RuntimeError("cannot pop the program frame")
        return self._frames.pop()

    def truncate(self, depth: int) -> None:
        """Drop frames until ``depth`` remain."""
        del self._frames[max(depth, 1) :]

    def _resolve(self, name: str) -> Frame | None:
        for frame in reversed(self._frames):
            if name in frame.bindings:
                return frame
            if frame.barrier:
                return None
        return None

    def lookup(self, name: str) -> Any:
        frame = self._resolve(name)
        if frame is None:
            raise UndefinedVar(name)
        return frame.bindings[name]

    def is_bound(self, name: str) -> bool:
        return self._resolve(name) is not None

    def bind(self, name: str, value: Any) -> None:
        """Bind in the innermost frame."""
        self._frames[-1].bindings[name] = value

    def snapshot(self) -> tuple:
        """Immutable picture of every frame, for before/after comparisons."""
        return tuple((tuple(f.bindings.items()), f.barrier) for f in self._frames)
