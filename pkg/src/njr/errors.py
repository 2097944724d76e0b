"""Exception hierarchy shared by every njr package.

Each class carries the process exit code the CLI reports for it. Errors
raised while a program runs are decorated with the trace and stdout
transcript collected so far (``trace`` / ``stdout``).
"""

from typing import Any


class NjrError(Exception):
    """Base class for all njr errors."""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.trace: list[Any] = []
        self.stdout: list[str] = []


# =============================================================================
# Parsing
# =============================================================================


class ParseError(NjrError):
    """Source text does not form a valid program."""

    exit_code = 2

    def __init__(self, message: str, line: int = 0, column: int = 0):
        location = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


class UnboundGotoTarget(ParseError):
    """A host-written goto names no enclosing label."""


# =============================================================================
# Host runtime
# =============================================================================


class HostRuntimeError(NjrError):
    """Evaluation of host code failed."""

    exit_code = 3


class HostTypeError(HostRuntimeError):
    """An operation was applied to values of the wrong type."""


class UndefinedVar(HostRuntimeError):
    """A variable was read before being bound."""

    def __init__(self, name: str):
        super().__init__(f"variable '{name}' is not defined")
        self.name = name


class DanglingRef(HostRuntimeError):
    """An address does not name a live heap cell."""

    def __init__(self, address: int):
        super().__init__(f"address {address} is not live")
        self.address = address


class DeadLabel(HostRuntimeError):
    """A goto targets a label that is not on the active control stack."""


class PayloadNotAllowed(HostRuntimeError):
    """A payload was passed to a break or continue label."""


class RaisedError(HostRuntimeError):
    """The program jumped to its top-level ``raise`` label."""

    def __init__(self, payload: Any, rendered: str):
        super().__init__(f"raised: {rendered}")
        self.payload = payload


# =============================================================================
# Session limits
# =============================================================================


class BudgetExceeded(NjrError):
    """A natural block attempted more effects than the configured budget."""

    exit_code = 4


class BlockTimeout(NjrError):
    """A natural block ran past its wall-clock bound."""

    exit_code = 5


# =============================================================================
# Agents
# =============================================================================


class AgentError(NjrError):
    """The agent failed to produce a usable step."""

    exit_code = 6


class MalformedStep(AgentError):
    """The agent produced output that is not an AgentStep. The runtime re-prompts."""


class NoRule(AgentError):
    """No script rule matches the current context."""


class TraceExhausted(AgentError):
    """A replayed trace has no more steps for the running program."""


class TraceMismatch(AgentError):
    """A live response differs from the recorded one."""

    def __init__(self, message: str, session: int, step: int):
        super().__init__(f"{message} (session {session}, step {step})")
        self.session = session
        self.step = step


# =============================================================================
# Registries and stores
# =============================================================================


class UnknownBlock(NjrError):
    """No natural block has the given id."""


class DuplicateTool(NjrError):
    """A tool name was registered twice."""


class StoreIO(NjrError):
    """A trace or cache file could not be read or written."""


class WireFormatError(NjrError):
    """JSON does not follow the wire encoding."""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, NjrError):
        return error.exit_code
    return 1
