"""Bench harness: runs a suite of programs and reports pass rates.

A suite directory holds ``<name>.njr`` programs, each with a
``<name>.asserts.json`` file and optionally ``<name>.stdin``,
``<name>.agent.json`` (scripted agent) and ``<name>.trace.jsonl``
(replay agent). Every program runs ``repeats`` times; a failing run
counts as a row with no passing assertions and never stops the suite.
"""

import asyncio
import logging
import statistics
import time
from pathlib import Path

from ..agents.factory import build_agent, build_tools
from ..config import RunConfig
from ..errors import NjrError, StoreIO
from ..host.interpreter import run
from ..host.parser import load_program
from ..trace_store.cache import TraceCache
from .assertions import count_passing, load_assertions
from .public_api import Assertion, BenchAggregate, BenchReport, ProgramRow, RepeatResult, SuiteProgram

logger = logging.getLogger("njr.bench")

PROGRAM_SUFFIX = ".njr"


def discover(suite_dir: str | Path) -> list[SuiteProgram]:
    """
    List the programs of a suite, sorted by name.

    Raises:
        StoreIO: The directory does not exist or holds no programs.
    """
    suite_dir = Path(suite_dir)
    if not suite_dir.is_dir():
        raise StoreIO(f"suite directory {suite_dir} does not exist")

    def beside(program: Path, suffix: str) -> Path | None:
        candidate = program.with_name(program.stem + suffix)
        return candidate if candidate.exists() else None

    programs = []
    for program in sorted(suite_dir.glob(f"*{PROGRAM_SUFFIX}")):
        programs.append(
            SuiteProgram(
                name=program.stem,
                program_path=program,
                asserts_path=beside(program, ".asserts.json"),
                stdin_path=beside(program, ".stdin"),
                script_path=beside(program, ".agent.json"),
                trace_path=beside(program, ".trace.jsonl"),
            )
        )
    if not programs:
        raise StoreIO(f"suite directory {suite_dir} holds no {PROGRAM_SUFFIX} programs")
    return programs


def _program_config(entry: SuiteProgram, config: RunConfig) -> RunConfig:
    return config.model_copy(
        update={
            "script_path": str(entry.script_path) if entry.script_path else config.script_path,
            "trace_path": str(entry.trace_path) if entry.trace_path else config.trace_path,
        }
    )


async def run_program(entry: SuiteProgram, config: RunConfig, cache: TraceCache | None = None) -> RepeatResult:
    """Run one program once and score its assertions. Errors become a failed result."""
    started = time.perf_counter()
    assertions: list[Assertion] = []
    agent = None
    try:
        if entry.asserts_path is not None:
            assertions = load_assertions(entry.asserts_path)
        program = load_program(entry.program_path)
        stdin: list[str] = []
        if entry.stdin_path is not None:
            try:
                stdin = entry.stdin_path.read_text(encoding="utf-8").splitlines()
            except OSError as e:
                raise StoreIO(f"cannot read {entry.stdin_path}: {e}") from e
        program_config = _program_config(entry, config)
        if program.blocks:
            agent = build_agent(program_config, cache=cache)
        result = await run(program, stdin, agent, program_config, tools=build_tools(program_config))
    except NjrError as e:
        logger.warning(f"{entry.name}: {type(e).__name__}: {e.message}")
        return RepeatResult(
            passed=0,
            total=len(assertions),
            wall_time_s=time.perf_counter() - started,
            error=type(e).__name__,
        )
    finally:
        if agent is not None:
            await agent.aclose()

    passed = count_passing(assertions, result)
    logger.info(f"{entry.name}: {passed}/{len(assertions)} assertion(s) passed in {result.wall_time_s:.3f}s")
    return RepeatResult(
        passed=passed,
        total=len(assertions),
        wall_time_s=result.wall_time_s,
        effect_count=result.effect_count,
    )


def program_row(entry: SuiteProgram, results: list[RepeatResult]) -> ProgramRow:
    rates = [r.pass_rate for r in results]
    times = [r.wall_time_s for r in results]
    return ProgramRow(
        name=entry.name,
        assertions=results[0].total if results else 0,
        pass_rate_mean=statistics.fmean(rates),
        pass_rate_std=statistics.pstdev(rates),
        wall_time_mean=statistics.fmean(times),
        wall_time_min=min(times),
        wall_time_max=max(times),
        effect_count_mean=statistics.fmean(r.effect_count for r in results),
        errors=sorted({r.error for r in results if r.error is not None}),
        repeats=results,
    )


def aggregate(rows: list[ProgramRow]) -> BenchAggregate:
    """
    Suite statistics from per-program rows.

    Pass rates are averaged across programs per repeat first; mean, std and
    range are then taken over those per-repeat suite means.
    """
    repeats = min(len(row.repeats) for row in rows)
    suite_means = [statistics.fmean(row.repeats[i].pass_rate for row in rows) for i in range(repeats)]
    times = [r.wall_time_s for row in rows for r in row.repeats]
    return BenchAggregate(
        pass_rate_mean=statistics.fmean(suite_means),
        pass_rate_std=statistics.pstdev(suite_means),
        pass_rate_min=min(suite_means),
        pass_rate_max=max(suite_means),
        wall_time_mean=statistics.fmean(times),
        wall_time_min=min(times),
        wall_time_max=max(times),
        effect_count_mean=statistics.fmean(row.effect_count_mean for row in rows),
    )


async def run_suite(suite_dir: str | Path, config: RunConfig) -> BenchReport:
    """
    Run every program of a suite ``config.repeats`` times.

    Up to ``config.parallel`` programs run at once, each in its own
    interpreter with its own agent; only the cache is shared.

    Args:
        suite_dir: Directory laid out as described in the module docstring.
        config: Run configuration applied to every program.

    Returns:
        BenchReport with one row per program.
    """
    entries = discover(suite_dir)
    cache = TraceCache(config.cache_path) if config.cache else None
    semaphore = asyncio.Semaphore(config.parallel)

    async def bounded(entry: SuiteProgram) -> RepeatResult:
        async with semaphore:
            return await run_program(entry, config, cache)

    logger.info(f"Running {len(entries)} program(s) x {config.repeats} repeat(s) from {suite_dir}")
    results: dict[str, list[RepeatResult]] = {entry.name: [] for entry in entries}
    for repeat in range(config.repeats):
        outcomes = await asyncio.gather(*(bounded(entry) for entry in entries))
        for entry, outcome in zip(entries, outcomes):
            results[entry.name].append(outcome)
        logger.debug(f"Repeat {repeat + 1}/{config.repeats} done")

    rows = [program_row(entry, results[entry.name]) for entry in entries]
    if cache is not None:
        logger.info(f"Cache: {cache.hits} hit(s), {cache.misses} miss(es)")
    return BenchReport(
        suite=str(suite_dir),
        agent=config.agent,
        mode=config.mode,
        repeats=config.repeats,
        programs=rows,
        aggregate=aggregate(rows),
    )


def format_table(report: BenchReport) -> str:
    """Fixed-width text table of a report."""
    header = f"{'program':<24} {'pass rate':>15} {'time (s)':>24} {'effects':>8}  errors"
    lines = [
        f"# suite {report.suite} | agent {report.agent} | mode {report.mode} | "
        f"{report.repeats} repeat(s) | pass rate is {report.granularity}",
        header,
        "-" * len(header),
    ]
    for row in report.programs:
        rate = f"{row.pass_rate_mean:.2f} +/- {row.pass_rate_std:.2f}"
        times = f"{row.wall_time_mean:.3f} [{row.wall_time_min:.3f}, {row.wall_time_max:.3f}]"
        errors = ", ".join(row.errors) or "-"
        lines.append(f"{row.name:<24} {rate:>15} {times:>24} {row.effect_count_mean:>8.1f}  {errors}")
    agg = report.aggregate
    lines.append("-" * len(header))
    rate = f"{agg.pass_rate_mean:.2f} +/- {agg.pass_rate_std:.2f}"
    times = f"{agg.wall_time_mean:.3f} [{agg.wall_time_min:.3f}, {agg.wall_time_max:.3f}]"
    lines.append(f"{'ALL':<24} {rate:>15} {times:>24} {agg.effect_count_mean:>8.1f}")
    lines.append(f"# pass rate range over repeats: [{agg.pass_rate_min:.2f}, {agg.pass_rate_max:.2f}]")
    return "\n".join(lines)


def write_report(report: BenchReport, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(report.to_json() + "\n", encoding="utf-8")
    except OSError as e:
        raise StoreIO(f"cannot write report {path}: {e}") from e
