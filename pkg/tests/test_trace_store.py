"""Tests for trace files and the step cache."""

import pytest

from njr.agents.cached import CachingAgent
from njr.agents.scripted import ScriptedAgent
from njr.errors import AgentError, StoreIO
from njr.nfi.public_api import Assign, Emit, Finish, Lookup, Ok, Return
from njr.trace_store.cache import TraceCache, cache_key
from njr.trace_store.public_api import CacheKey
from njr.trace_store.recorder import parse_traces, read_traces, trace_lines, write_traces
from tests.helpers import GRAPH_SUITE, ListAgent, run_source

SOURCE = 'let name = "Ada"; natural """Greet <name> into <:greeting>."""; greeting'


class StepLog(ScriptedAgent):
    """Scripted agent that notes (session, step) for every step it computes."""

    def __init__(self, script):
        super().__init__(script)
        self.computed: list[tuple[int, int]] = []

    async def step(self, ctx):
        self.computed.append((ctx.session, len(ctx.history)))
        return await super().step(ctx)


async def _traces(effects) -> list:
    result = await run_source(SOURCE, ListAgent(effects))
    return result.traces


class TestTraceFiles:
    """Tests for trace_lines, write_traces and parse_traces."""

    @pytest.mark.asyncio
    async def test_write_then_read(self, tmp_path):
        """Traces read back equal to what was written, one JSON object per line."""
        records = await _traces([Lookup(var="name"), Assign(var="greeting", value="Hi"), Return()])
        path = tmp_path / "run.trace.jsonl"
        write_traces(path, records)
        assert read_traces(path) == records
        lines = path.read_text().splitlines()
        assert lines[0].startswith('{"header":{')
        assert lines[1] == '{"effect":{"kind":"Lookup","var":"name"},"response":{"ok":{"string":"Ada"}}}'
        assert lines[-1] == '{"terminal":{"kind":"Return","value":{"null":null}}}'

    @pytest.mark.asyncio
    async def test_failed_session_has_no_terminal(self):
        """A failed session is written without a terminal line and still parses."""
        with pytest.raises(AgentError) as excinfo:
            await run_source(SOURCE, ListAgent([Lookup(var="name")]))
        records = excinfo.value.trace
        lines = trace_lines(records)
        assert len(lines) == 2
        assert parse_traces("\n".join(lines)) == records

    @pytest.mark.asyncio
    async def test_lines_are_deterministic(self):
        """The same run produces the same trace lines."""
        effects = [Lookup(var="name"), Lookup(var="nope"), Assign(var="greeting", value="x"), Return()]
        assert trace_lines(await _traces(effects)) == trace_lines(await _traces(effects))

    @pytest.mark.parametrize(
        "text,line",
        [
            ('{"effect":{"kind":"Lookup","var":"x"},"response":{"ok":{"null":null}}}', 1),
            ("not json", 1),
            ("[1]", 1),
            ('{"header":{"program":"p","block_id":"1:1","mode":"shared","config":"c"}}\n{"bogus":1}', 2),
            (
                '{"header":{"program":"p","block_id":"1:1","mode":"shared","config":"c"}}\n'
                '{"terminal":{"kind":"Return","value":{"null":null}}}\n'
                '{"terminal":{"kind":"Return","value":{"null":null}}}',
                3,
            ),
            ('{"header":{"block_id":"1:1"}}', 1),
        ],
    )
    def test_malformed_lines(self, text, line):
        """A bad line is reported with its line number."""
        with pytest.raises(StoreIO) as excinfo:
            parse_traces(text)
        assert f"<trace>:{line}:" in excinfo.value.message

    def test_blank_lines_are_skipped(self):
        """Blank lines between records are ignored."""
        text = '\n{"header":{"program":"p","block_id":"1:1","mode":"shared","config":"c","session":3}}\n\n'
        (rec,) = parse_traces(text)
        assert rec.header.session == 3
        assert rec.entries == []
        assert rec.terminal is None

    def test_io_errors(self, tmp_path):
        """Unreadable and unwritable paths raise StoreIO."""
        with pytest.raises(StoreIO):
            read_traces(tmp_path / "missing.jsonl")
        with pytest.raises(StoreIO):
            write_traces(tmp_path, [])


class TestTraceCache:
    """Tests for TraceCache."""

    def test_key(self):
        """Cache keys are SHA-256 digests of the agent and context."""
        key = cache_key("agent", "context")
        assert key == CacheKey.of("agent", "context")
        assert key != cache_key("other", "context")
        assert len(key.digest) == 64

    @pytest.mark.asyncio
    async def test_put_lookup_and_persist(self, tmp_path):
        """The first step stored under a key wins and survives a reopen."""
        path = tmp_path / "cache.jsonl"
        cache = TraceCache(path)
        key = cache_key("a", "ctx")
        assert cache.lookup(key) is None
        await cache.put(key, Emit(effect=Lookup(var="q")))
        await cache.put(key, Finish(value=1))
        assert cache.lookup(key) == Emit(effect=Lookup(var="q"))
        assert (cache.hits, cache.misses) == (1, 1)
        assert len(path.read_text().splitlines()) == 1

        reopened = TraceCache(path)
        assert len(reopened) == 1
        assert reopened.lookup(key) == Emit(effect=Lookup(var="q"))

    def test_malformed_cache_file(self, tmp_path):
        """A cache file with bad entries raises StoreIO."""
        path = tmp_path / "cache.jsonl"
        path.write_text('{"key": "k"}\n')
        with pytest.raises(StoreIO):
            TraceCache(path)

    @pytest.mark.asyncio
    async def test_cached_runs_are_transparent(self, tmp_path):
        """A cached rerun yields byte-identical traces without computing a step."""
        source = (GRAPH_SUITE / "graph.njr").read_text()
        stdin = (GRAPH_SUITE / "graph.stdin").read_text().splitlines()
        script = ScriptedAgent.from_file(GRAPH_SUITE / "graph.agent.json").script

        runs = []
        for _ in range(2):
            agent = CachingAgent(ScriptedAgent(script), TraceCache(tmp_path / "cache.jsonl"))
            runs.append(await run_source(source, agent, stdin=stdin))
        first, second = runs
        assert first.agent_invocations > 0
        assert second.agent_invocations == 0
        assert trace_lines(first.traces) == trace_lines(second.traces)
        assert first.stdout == second.stdout

    @pytest.mark.asyncio
    async def test_divergent_stdin_misses_after_the_changed_lookup(self, tmp_path):
        """Only steps whose history differs from a cached run reach the wrapped agent."""
        source = (GRAPH_SUITE / "graph.njr").read_text()
        stdin = (GRAPH_SUITE / "graph.stdin").read_text().splitlines()
        script = ScriptedAgent.from_file(GRAPH_SUITE / "graph.agent.json").script
        changed = list(stdin)
        changed[2] = "How many papers cite paper 99?"
        path = tmp_path / "cache.jsonl"

        original = await run_source(
            source, CachingAgent(ScriptedAgent(script), TraceCache(path)), stdin=stdin, eager=False
        )
        inner = StepLog(script)
        cache = TraceCache(path)
        rerun = await run_source(source, CachingAgent(inner, cache), stdin=changed, eager=False)

        # The changed session's Lookup is served from the cache; its answer differs from there on.
        assert inner.computed == [(2, 1), (2, 2)]
        assert rerun.agent_invocations == 2
        assert cache.misses == 2
        assert rerun.traces[2].entries[0].effect == Lookup(var="query")
        assert rerun.traces[2].entries[0].response == Ok(value="How many papers cite paper 99?")
        assert "A: I cannot answer that." in rerun.stdout
        assert trace_lines(rerun.traces[:2]) == trace_lines(original.traces[:2])
        assert trace_lines(rerun.traces[3:]) == trace_lines(original.traces[3:])
