"""Loading and checking per-program assertions."""

import json
import logging
from pathlib import Path
from typing import Any

from pydantic import TypeAdapter, ValidationError

from ..errors import NjrError, StoreIO
from ..host.public_api import RunResult
from ..host.values import to_plain
from .public_api import Assertion, FinalVarEquals, HeapPathEquals, StdoutContains

logger = logging.getLogger("njr.bench")

_ASSERTIONS = TypeAdapter(list[Assertion])

_MISSING = object()


def load_assertions(path: str | Path) -> list[Assertion]:
    """
    Read a ``<name>.asserts.json`` file.

    Raises:
        StoreIO: The file is missing, not JSON, or not a list of assertions.
    """
    path = Path(path)
    try:
        return _ASSERTIONS.validate_python(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, ValidationError) as e:
        raise StoreIO(f"cannot load assertions {path}: {e}") from e


def same_plain(actual: Any, expected: Any) -> bool:
    """Plain-JSON equality where numbers compare by value and Bool never equals a number."""
    if isinstance(actual, bool) or isinstance(expected, bool):
        return isinstance(actual, bool) and isinstance(expected, bool) and actual == expected
    if isinstance(actual, (int, float)) and isinstance(expected, (int, float)):
        return actual == expected
    if isinstance(actual, list) and isinstance(expected, list):
        return len(actual) == len(expected) and all(same_plain(a, e) for a, e in zip(actual, expected))
    if isinstance(actual, dict) and isinstance(expected, dict):
        return actual.keys() == expected.keys() and all(same_plain(actual[k], expected[k]) for k in actual)
    return type(actual) is type(expected) and actual == expected


def _follow(value: Any, path: list[str | int]) -> Any:
    for step in path:
        position = isinstance(step, int) and not isinstance(step, bool)
        if isinstance(value, dict) and isinstance(step, str) and step in value:
            value = value[step]
        elif isinstance(value, list) and position and 0 <= step < len(value):
            value = value[step]
        else:
            return _MISSING
    return value


def check(assertion: Assertion, result: RunResult) -> bool:
    """Whether one assertion holds for a finished run."""
    if isinstance(assertion, StdoutContains):
        return any(assertion.text in line for line in result.stdout)

    if assertion.var not in result.globals or result.heap is None:
        logger.debug(f"Assertion on unbound variable '{assertion.var}'")
        return False
    try:
        plain = to_plain(result.globals[assertion.var], result.heap)
    except NjrError as e:
        logger.debug(f"Cannot read '{assertion.var}': {e.message}")
        return False
    if isinstance(assertion, FinalVarEquals):
        return same_plain(plain, assertion.value)
    if isinstance(assertion, HeapPathEquals):
        reached = _follow(plain, assertion.path)
        return reached is not _MISSING and same_plain(reached, assertion.value)
    return False


def count_passing(assertions: list[Assertion], result: RunResult) -> int:
    return sum(1 for assertion in assertions if check(assertion, result))
