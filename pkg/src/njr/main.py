"""Command-line entry point for njr.

    njr run PROGRAM [--agent scripted|replay|llm] [--mode shared|tools|isolated] ...
    njr replay PROGRAM --trace FILE
    njr bench SUITE_DIR [--repeats N] [--parallel N] [--report-out FILE]

Program output goes to stdout; logs and error reports go to stderr.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any, Iterable

from pydantic import ValidationError

from .agents.factory import build_agent, build_tools
from .bench.harness import format_table, run_suite, write_report
from .config import RunConfig, settings
from .errors import NjrError, StoreIO, exit_code_for
from .host.interpreter import run as run_program
from .host.parser import load_program
from .host.values import render
from .trace_store.recorder import write_traces

logger = logging.getLogger("njr.cli")

# Flags that map one-to-one onto RunConfig fields.
_CONFIG_FLAGS = (
    "agent",
    "mode",
    "script_path",
    "trace_path",
    "trace_out",
    "cache",
    "cache_path",
    "max_effects",
    "timeout_s",
    "model",
    "eager",
    "stdin_path",
    "repeats",
    "parallel",
    "report_out",
)


def _echo(line: str) -> None:
    print(line, flush=True)


def _read_stdin(config: RunConfig) -> Iterable[str]:
    if config.stdin_path is None:
        return sys.stdin
    try:
        return Path(config.stdin_path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise StoreIO(f"cannot read {config.stdin_path}: {e}") from e


def _report(error: NjrError) -> int:
    print(f"{type(error).__name__}: {error.message}", file=sys.stderr)
    return exit_code_for(error)


async def cmd_run(config: RunConfig, program_path: str) -> int:
    """
    Run one program and print its transcript.

    The trace of every natural-block session is written to
    ``config.trace_out`` when set, including the sessions of a failed run.

    Returns:
        0 on normal termination, otherwise the exit code of the error class.
    """
    agent = None
    traces: list[Any] = []
    try:
        program = load_program(program_path)
        if program.blocks:
            agent = build_agent(config)
        result = await run_program(
            program,
            _read_stdin(config),
            agent,
            config,
            tools=build_tools(config),
            echo=_echo,
        )
        traces = result.traces
        if result.value is not None:
            _echo(render(result.value, result.heap))
        logger.info(
            f"{program_path}: {len(result.traces)} session(s), {result.effect_count} effect(s), "
            f"{result.agent_invocations} agent step(s), {result.wall_time_s:.3f}s"
        )
        code = 0
    except NjrError as e:
        traces = e.trace
        code = _report(e)
    finally:
        if agent is not None:
            await agent.aclose()

    if config.trace_out:
        try:
            write_traces(config.trace_out, traces)
        except StoreIO as e:
            return _report(e)
        logger.info(f"Wrote {len(traces)} trace(s) to {config.trace_out}")
    return code


async def cmd_bench(config: RunConfig, suite_dir: str) -> int:
    """Run a suite, print the table and optionally write the JSON report."""
    try:
        report = await run_suite(suite_dir, config)
        print(format_table(report), flush=True)
        if config.report_out:
            write_report(report, config.report_out)
            logger.info(f"Wrote report to {config.report_out}")
    except NjrError as e:
        return _report(e)
    return 0


# =============================================================================
# Argument parsing
# =============================================================================


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--agent", choices=["scripted", "replay", "llm"], help="Agent for natural blocks")
    parser.add_argument("--mode", choices=["shared", "tools", "isolated"], help="Natural function interface mode")
    parser.add_argument("--script", dest="script_path", help="Scripted agent file (.agent.json)")
    parser.add_argument("--trace", dest="trace_path", help="Trace file to replay (.trace.jsonl)")
    parser.add_argument("--trace-out", dest="trace_out", help="Write session traces to this file")
    parser.add_argument("--cache", action="store_true", default=None, help="Serve agent steps from the trace cache")
    parser.add_argument("--cache-path", dest="cache_path", help=f"Cache file (default {settings.cache_path})")
    parser.add_argument("--max-effects", dest="max_effects", type=int, help="Effect budget per session")
    parser.add_argument("--timeout", dest="timeout_s", type=float, help="Wall-clock bound per session, in seconds")
    parser.add_argument("--model", help="Model name for the llm agent")
    parser.add_argument(
        "--eager",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Show input values in the agent context",
    )
    parser.add_argument("--stdin", dest="stdin_path", help="Serve input() from this file instead of the terminal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="njr", description="Run programs with embedded natural-language blocks")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run a program")
    run_parser.add_argument("program")
    _add_run_flags(run_parser)

    replay_parser = sub.add_parser("replay", help="Run a program against a recorded trace")
    replay_parser.add_argument("program")
    _add_run_flags(replay_parser)

    bench_parser = sub.add_parser("bench", help="Run a suite and report pass rates")
    bench_parser.add_argument("suite_dir")
    _add_run_flags(bench_parser)
    bench_parser.add_argument("--repeats", type=int, help="Runs per program (default 5)")
    bench_parser.add_argument("--parallel", type=int, help="Programs run concurrently (default 1)")
    bench_parser.add_argument("--report-out", dest="report_out", help="Write the JSON report to this file")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed flags; unset flags keep the environment defaults."""
    overrides = {name: getattr(args, name) for name in _CONFIG_FLAGS if getattr(args, name, None) is not None}
    if args.command == "replay":
        overrides["agent"] = "replay"
    return RunConfig(**overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s | %(name)s | %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
    )

    try:
        config = config_from_args(args)
    except ValidationError as e:
        parser.error(str(e))
    if args.command == "replay" and not config.trace_path:
        parser.error("replay needs --trace")

    if args.command == "bench":
        return asyncio.run(cmd_bench(config, args.suite_dir))
    return asyncio.run(cmd_run(config, args.program))


def run() -> None:
    """Console script entry."""
    sys.exit(main())


if __name__ == "__main__":
    run()
