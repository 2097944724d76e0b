"""End-to-end runs of the shipped suites."""

import pytest

from njr.agents.replay import ReplayAgent
from njr.agents.scripted import ScriptedAgent
from njr.bench.assertions import count_passing, load_assertions
from njr.host.values import to_plain
from njr.nfi.public_api import Deref, Ok, RefTag, Set
from tests.helpers import BASICS_SUITE, GRAPH_SUITE, run_source


def _graph_inputs() -> tuple[str, list[str]]:
    source = (GRAPH_SUITE / "graph.njr").read_text()
    stdin = (GRAPH_SUITE / "graph.stdin").read_text().splitlines()
    return source, stdin


def _graph_agent() -> ScriptedAgent:
    return ScriptedAgent.from_file(GRAPH_SUITE / "graph.agent.json")


class TestGraphProgram:
    """The citation-graph question loop driven by its scripted agent."""

    @pytest.mark.asyncio
    async def test_transcript(self):
        """The question loop prints each answer and stops on the exit question."""
        source, stdin = _graph_inputs()
        result = await run_source(source, _graph_agent(), stdin=stdin)

        assert "A: Graph updated." in result.stdout
        assert "[2, 7, 8, 13, 24, 5]" in result.stdout
        assert result.stdout[-1] == "Q: Exit, please."
        assert result.stdout[0] == "Q: Give the number of papers that cite paper 19."
        assert result.stdout[1] == "A: 9 papers cite paper 19."
        assert len(result.traces) == 6
        assert result.traces[-1].terminal.kind == "Goto"

    @pytest.mark.asyncio
    async def test_assertions_pass(self):
        """Every shipped assertion for the graph program holds."""
        source, stdin = _graph_inputs()
        result = await run_source(source, _graph_agent(), stdin=stdin)
        assertions = load_assertions(GRAPH_SUITE / "graph.asserts.json")
        assert count_passing(assertions, result) == len(assertions)

    @pytest.mark.asyncio
    async def test_update_writes_through_the_heap(self):
        """The update session reads edges["14"] by reference and replaces its contents with Set."""
        source, stdin = _graph_inputs()
        result = await run_source(source, _graph_agent(), stdin=stdin)
        update = result.traces[3]
        assert update.entries[1].response == Ok(value=RefTag(id=24))
        assert update.entries[4].effect == Deref(ref=RefTag(id=13))
        assert update.entries[4].response == Ok(value=[2, 7, 8, 13, 24])
        assert update.entries[5].effect == Set(ref=RefTag(id=13), value=[2, 7, 8, 13, 24, 5])
        # Host code reads the list through graph.edges after the block.
        after = result.stdout.index("A: Graph updated.")
        assert result.stdout[after + 1 : after + 3] == ["Papers that cite paper 14:", "[2, 7, 8, 13, 24, 5]"]
        assert to_plain(result.globals["graph"], result.heap)["edges"]["14"] == [2, 7, 8, 13, 24, 5]

    @pytest.mark.asyncio
    async def test_paper_zero_is_gone(self):
        """Removing paper 0 takes it out of the nodes and every edge list."""
        source, stdin = _graph_inputs()
        result = await run_source(source, _graph_agent(), stdin=stdin)
        graph = to_plain(result.globals["graph"], result.heap)
        assert 0 not in graph["nodes"]
        assert all(0 not in citers for citers in graph["edges"].values())

    @pytest.mark.asyncio
    async def test_lazy_context_gives_the_same_run(self):
        """Turning eager context off changes neither stdout nor the effects issued."""
        source, stdin = _graph_inputs()
        eager = await run_source(source, _graph_agent(), stdin=stdin, eager=True)
        lazy = await run_source(source, _graph_agent(), stdin=stdin, eager=False)
        assert eager.stdout == lazy.stdout
        assert [t.entries for t in eager.traces] == [t.entries for t in lazy.traces]

    @pytest.mark.asyncio
    async def test_replay_reproduces_the_transcript(self):
        """Replaying the recorded traces gives the same stdout and heap."""
        source, stdin = _graph_inputs()
        recorded = await run_source(source, _graph_agent(), stdin=stdin)
        replayed = await run_source(source, ReplayAgent(recorded.traces), stdin=stdin)
        assert replayed.stdout == recorded.stdout
        assert replayed.heap.snapshot() == recorded.heap.snapshot()


class TestBasicsSuite:
    """The basics suite programs run with their scripts."""

    @pytest.mark.asyncio
    async def test_search_jumps_to_found(self):
        """The search block jumps to its label with the best match."""
        source = (BASICS_SUITE / "search.njr").read_text()
        agent = ScriptedAgent.from_file(BASICS_SUITE / "search.agent.json")
        result = await run_source(source, agent)
        assert result.stdout == ["best ben"]
        assert result.globals["best"] == "ben"

    @pytest.mark.asyncio
    async def test_greet_reads_stdin(self):
        """The greeting uses the name read from stdin."""
        source = (BASICS_SUITE / "greet.njr").read_text()
        agent = ScriptedAgent.from_file(BASICS_SUITE / "greet.agent.json")
        stdin = (BASICS_SUITE / "greet.stdin").read_text().splitlines()
        result = await run_source(source, agent, stdin=stdin)
        assert result.stdout[-1] == "Hello, Ada!"
