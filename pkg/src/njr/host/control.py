"""Control state: active label frames and unwinding."""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, NoReturn

from ..errors import DeadLabel, PayloadNotAllowed
from .public_api import LabelKind, LabelName

logger = logging.getLogger("njr.control")

# Unwinding to these crosses function boundaries; every other label is local to its function.
_NONLOCAL_KINDS = {LabelKind.FUNCTION_RETURN}
_NONLOCAL_NAMES = {"raise"}


@dataclass
class LabelFrame:
    """An active label with the scope depth at which it was entered."""

    label: LabelName
    scope_depth: int
    token: int


class Unwind(Exception):
    """Unwinds the Python stack to the label frame it carries."""

    def __init__(self, frame: LabelFrame, payload: Any = None):
        super().__init__(frame.label.name)
        self.frame = frame
        self.payload = payload


class ControlState:
    """Stack of active label frames."""

    def __init__(self) -> None:
        self._frames: list[LabelFrame] = []
        self._tokens = itertools.count()

    @property
    def depth(self) -> int:
        return len(self._frames)

    def enter(self, label: LabelName, scope_depth: int) -> LabelFrame:
        frame = LabelFrame(label=label, scope_depth=scope_depth, token=next(self._tokens))
        self._frames.append(frame)
        return frame

    def exit(self, frame: LabelFrame) -> None:
        """Pop ``frame`` and anything still above it."""
        while self._frames:
            top = self._frames.pop()
            if top is frame:
                return

    def find(self, label: LabelName) -> LabelFrame | None:
        """Innermost active frame for ``label`` reachable from the current function."""
        for frame in reversed(self._frames):
            if frame.label.name == label.name and frame.label.kind == label.kind:
                return frame
            if frame.label.kind == LabelKind.FUNCTION_RETURN:
                if label.kind not in _NONLOCAL_KINDS and label.name not in _NONLOCAL_NAMES:
                    return None
        return None

    def active(self) -> list[LabelName]:
        return [frame.label for frame in self._frames]

    def snapshot(self) -> tuple:
        return tuple((f.label.name, f.label.kind.value, f.scope_depth) for f in self._frames)


def unwind_to_label(control: ControlState, label: LabelName, payload: Any = None) -> NoReturn:
    """
    Transfer control to the innermost active frame for ``label``.

    Never returns. The label's owner catches the Unwind, truncates the
    scope stack to the saved depth and continues with ``payload`` as its value.
    A payload of None is the same as no payload.
    """
    if payload is not None and label.kind in (LabelKind.LOOP_BREAK, LabelKind.LOOP_CONTINUE):
        raise PayloadNotAllowed(f"label '{label.name}' takes no payload")
    frame = control.find(label)
    if frame is None:
        raise DeadLabel(f"label '{label.name}' is not active")
    logger.debug(f"Unwinding to {label.name} (scope depth {frame.scope_depth})")
    raise Unwind(frame, payload)
