"""
Public API for the bench harness.

Suites are directories of programs with assertion files beside them; the
harness runs each program a number of times and reports pass rates.
"""

from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field

GRANULARITY = "per-assertion"


# =============================================================================
# Assertions
# =============================================================================


class StdoutContains(BaseModel):
    """Some transcript line contains ``text``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["stdout-contains"] = "stdout-contains"
    text: str


class FinalVarEquals(BaseModel):
    """A top-level variable ends with a value equal to ``value`` (plain JSON)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["final-var-equals"] = "final-var-equals"
    var: str
    value: Any = None


class HeapPathEquals(BaseModel):
    """Following ``path`` from a top-level variable reaches ``value``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["heap-path-equals"] = "heap-path-equals"
    var: str
    path: list[str | int]
    value: Any = None


Assertion = Annotated[StdoutContains | FinalVarEquals | HeapPathEquals, Field(discriminator="kind")]


# =============================================================================
# Suite layout
# =============================================================================


class SuiteProgram(BaseModel):
    """One program of a suite and the files found beside it."""

    name: str
    program_path: Path
    asserts_path: Path | None = None
    stdin_path: Path | None = None
    script_path: Path | None = None
    trace_path: Path | None = None


# =============================================================================
# Report
# =============================================================================


class RepeatResult(BaseModel):
    """One run of one program."""

    passed: int = 0
    total: int = 0
    wall_time_s: float = 0.0
    effect_count: int = 0
    error: str | None = None  # exception class name when the run failed

    @property
    def pass_rate(self) -> float:
        if self.error is not None:
            return 0.0
        if self.total == 0:
            return 1.0
        return self.passed / self.total


class ProgramRow(BaseModel):
    """Per-program statistics over all repeats."""

    name: str
    assertions: int
    pass_rate_mean: float = Field(ge=0.0, le=1.0)
    pass_rate_std: float = Field(ge=0.0)
    wall_time_mean: float
    wall_time_min: float
    wall_time_max: float
    effect_count_mean: float
    errors: list[str] = Field(default_factory=list)
    repeats: list[RepeatResult] = Field(default_factory=list)


class BenchAggregate(BaseModel):
    """Suite-level statistics, computed over the per-repeat suite means."""

    pass_rate_mean: float = Field(ge=0.0, le=1.0)
    pass_rate_std: float = Field(ge=0.0)
    pass_rate_min: float = Field(ge=0.0, le=1.0)
    pass_rate_max: float = Field(ge=0.0, le=1.0)
    wall_time_mean: float
    wall_time_min: float
    wall_time_max: float
    effect_count_mean: float


class BenchReport(BaseModel):
    """Result of running a suite."""

    granularity: Literal["per-assertion"] = GRANULARITY
    suite: str
    agent: str
    mode: str
    repeats: int
    programs: list[ProgramRow] = Field(default_factory=list)
    aggregate: BenchAggregate

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        return cls.model_validate_json(text)
