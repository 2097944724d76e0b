"""Tests for the scripted, replay, caching and chat-completions agents."""

import json

import httpx
import pytest

from njr.agents.cached import CachingAgent
from njr.agents.eager import preview
from njr.agents.factory import build_agent, build_tools
from njr.agents.llm import LLMAgent
from njr.agents.prompts import (
    build_messages,
    call_to_step,
    effect_to_call,
    load_template,
    tool_definitions,
)
from njr.agents.public_api import AgentContext, EagerVar
from njr.agents.replay import ReplayAgent, replay_next
from njr.agents.scripted import encode_script, load_script, parse_script
from njr.config import RunConfig
from njr.errors import AgentError, MalformedStep, NoRule, StoreIO, TraceExhausted, TraceMismatch, WireFormatError
from njr.nfi.public_api import (
    Assign,
    Call,
    Emit,
    Err,
    ErrCode,
    Finish,
    Goto,
    HandlerMode,
    IsolatedEval,
    Lookup,
    Ok,
    RefTag,
    Return,
    SharedEval,
    TraceEntry,
)
from njr.nfi.tools import ToolSpec
from njr.trace_store.cache import TraceCache
from tests.helpers import GRAPH_SUITE, ListAgent, only_block, run_source, scripted

EXIT_LOOP = 'let query = "Exit, please."; while true do natural """Handle <query>.""" end; "done"'


def _ctx(**overrides) -> AgentContext:
    fields = {
        "block_id": "1:1",
        "block_text": "Answer query.",
        "inputs": ("query",),
        "outputs": ("response",),
        "labels": ["break", "continue", "raise"],
    }
    fields.update(overrides)
    return AgentContext(**fields)


class TestScriptedAgent:
    """Tests for ScriptedAgent and script files."""

    @pytest.mark.asyncio
    async def test_guard_picks_the_rule(self):
        """The first rule whose guard matches the responses so far supplies the next step."""
        agent = scripted(
            "1:1",
            ("stop", [Lookup(var="query"), Goto(label="break")]),
            (None, [Lookup(var="query"), Assign(var="response", value="ok"), Return()]),
        )
        step = await agent.step(_ctx())
        assert step == Emit(effect=Lookup(var="query"))

        history = [TraceEntry(effect=Lookup(var="query"), response=Ok(value="please stop"))]
        assert await agent.step(_ctx(history=history)) == Emit(effect=Goto(label="break"))

        history = [TraceEntry(effect=Lookup(var="query"), response=Ok(value="hello"))]
        assert await agent.step(_ctx(history=history)) == Emit(effect=Assign(var="response", value="ok"))
        assert agent.invocations == 3

    @pytest.mark.asyncio
    async def test_guard_sees_eager_values(self):
        """Guards also match against eagerly supplied variable values."""
        agent = scripted("1:1", ("stop", [Goto(label="break")]))
        ctx = _ctx(eager_vars=[EagerVar(name="query", type="String", value="stop now")])
        assert await agent.step(ctx) == Emit(effect=Goto(label="break"))

    @pytest.mark.asyncio
    async def test_no_rule(self):
        """NoRule is raised when no rule matches or the block has no rules."""
        agent = scripted("1:1", ("never", [Return()]))
        with pytest.raises(NoRule):
            await agent.step(_ctx())
        with pytest.raises(NoRule):
            await agent.step(_ctx(block_id="9:9"))

    @pytest.mark.asyncio
    async def test_rules_stop_when_history_diverges(self):
        """A rule whose steps disagree with the history is not used."""
        agent = scripted("1:1", (None, [Lookup(var="query"), Return()]))
        history = [TraceEntry(effect=Lookup(var="other"), response=Ok(value=1))]
        with pytest.raises(NoRule):
            await agent.step(_ctx(history=history))

    def test_script_file(self, tmp_path):
        """A script written with encode_script loads back unchanged."""
        agent = scripted("1:1", ("x", [Lookup(var="query"), Return(value={"a": [1]})]))
        path = tmp_path / "s.agent.json"
        path.write_text(json.dumps(encode_script(agent.script)))
        assert load_script(path) == agent.script

    @pytest.mark.parametrize(
        "data",
        [
            [],
            {"blocks": []},
            {"blocks": {"1:1": {}}},
            {"blocks": {"1:1": [{"guard": "x"}]}},
            {"blocks": {"1:1": [{"guard": 3, "steps": []}]}},
            {"blocks": {"1:1": [{"steps": [{"kind": "Nope"}]}]}},
        ],
    )
    def test_malformed_scripts(self, data):
        """Script files with the wrong shape are rejected."""
        with pytest.raises(WireFormatError):
            parse_script(data)

    def test_unreadable_script(self, tmp_path):
        """Missing or unparsable script files raise StoreIO."""
        with pytest.raises(StoreIO):
            load_script(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(StoreIO):
            load_script(bad)

    def test_fingerprint_depends_on_script(self):
        """Equal scripts share a fingerprint and different scripts do not."""
        a = scripted("1:1", (None, [Return()]))
        b = scripted("1:1", (None, [Return(value=1)]))
        assert a.fingerprint() == scripted("1:1", (None, [Return()])).fingerprint()
        assert a.fingerprint() != b.fingerprint()


class TestReplayAgent:
    """Tests for ReplayAgent."""

    async def _recorded(self) -> list:
        agent = ListAgent([Lookup(var="query"), Goto(label="break")])
        result = await run_source(EXIT_LOOP, agent)
        return result.traces

    @pytest.mark.asyncio
    async def test_replay_reproduces_the_run(self):
        """Replaying a recorded run gives the same value and traces."""
        records = await self._recorded()
        replay = ReplayAgent(records)
        result = await run_source(EXIT_LOOP, replay)
        assert result.value == "done"
        assert result.traces == records
        assert replay.invocations == 2

    @pytest.mark.asyncio
    async def test_mismatch_on_different_response(self):
        """A changed handler response is reported with its session and step."""
        records = await self._recorded()
        source = EXIT_LOOP.replace("Exit, please.", "Exit, thanks.")
        with pytest.raises(TraceMismatch) as excinfo:
            await run_source(source, ReplayAgent(records))
        assert excinfo.value.session == 0
        assert excinfo.value.step == 0

    @pytest.mark.asyncio
    async def test_exhausted(self):
        """Asking for more steps than were recorded raises TraceExhausted."""
        records = await self._recorded()
        source = 'let query = "x"; natural """A <query>."""; natural """B <query>."""'
        with pytest.raises((TraceExhausted, TraceMismatch)):
            await run_source(source, ReplayAgent(records))
        with pytest.raises(TraceExhausted):
            replay_next([], _ctx())

    @pytest.mark.asyncio
    async def test_exhausted_when_recording_stops_early(self):
        """A session recorded without a terminal cannot be finished on replay."""
        records = await self._recorded()
        cut = [records[0].model_copy(update={"terminal": None})]
        with pytest.raises(TraceExhausted):
            await run_source(EXIT_LOOP, ReplayAgent(cut))

    @pytest.mark.asyncio
    async def test_block_id_mismatch(self):
        """Replay refuses a step for a block other than the recorded one."""
        records = await self._recorded()
        with pytest.raises(TraceMismatch):
            replay_next(records, _ctx(block_id="99:1"))


class TestCachingAgent:
    """Tests for CachingAgent."""

    @pytest.mark.asyncio
    async def test_hits_skip_the_inner_agent(self, tmp_path):
        """A second run served from the cache makes no agent calls."""
        cache = TraceCache(tmp_path / "cache.jsonl")
        inner = scripted(only_block(EXIT_LOOP), (None, [Lookup(var="query"), Goto(label="break")]))
        agent = CachingAgent(inner, cache)
        await run_source(EXIT_LOOP, agent)
        assert agent.invocations == 2
        assert len(cache) == 2

        second = CachingAgent(inner, TraceCache(tmp_path / "cache.jsonl"))
        result = await run_source(EXIT_LOOP, second)
        assert result.agent_invocations == 0
        assert second.cache.hits == 2

    @pytest.mark.asyncio
    async def test_cancel_reaches_inner(self, tmp_path):
        """Cancellation and fingerprint are forwarded to the wrapped agent."""
        inner = ListAgent([Goto(label="break")])
        agent = CachingAgent(inner, TraceCache(tmp_path / "c.jsonl"))
        await run_source(EXIT_LOOP, agent)
        assert inner.cancelled == 1
        assert agent.fingerprint() == "list"


class TestFactory:
    """Tests for building agents from a RunConfig."""

    def test_scripted_needs_a_script(self):
        """The scripted agent cannot be built without a script path."""
        with pytest.raises(AgentError):
            build_agent(RunConfig(agent="scripted"))

    def test_replay_needs_a_trace(self):
        """The replay agent cannot be built without a trace path."""
        with pytest.raises(AgentError):
            build_agent(RunConfig(agent="replay"))

    def test_cache_wraps(self, tmp_path):
        """Enabling the cache wraps the agent in a CachingAgent."""
        config = RunConfig(
            agent="scripted",
            script_path=str(GRAPH_SUITE / "graph.agent.json"),
            cache=True,
            cache_path=str(tmp_path / "c.jsonl"),
        )
        agent = build_agent(config)
        assert isinstance(agent, CachingAgent)

    def test_tools_only_in_tool_mode(self):
        """Tool specs are only built for tools mode."""
        assert build_tools(RunConfig(mode="shared")) is None
        assert len(build_tools(RunConfig(mode="tools"))) == 4


class TestPrompts:
    """Tests for tool definitions, transcripts and reading tool calls."""

    def test_tools_per_mode(self):
        """Each handler mode offers its own set of tool definitions."""
        template = load_template()
        names = [d["function"]["name"] for d in tool_definitions(template, _ctx())]
        assert names == ["lookup", "assign", "deref", "ref", "set", "goto", "eval", "done"]

        spec = ToolSpec(name="upper", description="Upper-case a string.")
        ctx = _ctx(mode=HandlerMode.TOOLS, tools=[spec])
        names = [d["function"]["name"] for d in tool_definitions(template, ctx)]
        assert names == ["done", "upper"]

        names = [d["function"]["name"] for d in tool_definitions(template, _ctx(mode=HandlerMode.ISOLATED))]
        assert names == ["eval", "done"]

    def test_goto_enum_lists_labels(self):
        """The goto tool restricts its label to the labels in scope."""
        (goto,) = [d for d in tool_definitions(load_template(), _ctx()) if d["function"]["name"] == "goto"]
        assert goto["function"]["parameters"]["properties"]["label"]["enum"] == ["break", "continue", "raise"]

    def test_call_to_step(self):
        """Tool calls are turned into the matching effect or finish step."""
        ctx = _ctx()
        assert call_to_step("lookup", '{"var": "query"}', ctx) == Emit(effect=Lookup(var="query"))
        assert call_to_step("assign", '{"var": "r", "value": {"$ref": 3}}', ctx) == Emit(
            effect=Assign(var="r", value=RefTag(id=3))
        )
        assert call_to_step("goto", '{"label": "break"}', ctx) == Emit(effect=Goto(label="break"))
        assert call_to_step("eval", '{"src": "1 + 1"}', ctx) == Emit(effect=SharedEval(src="1 + 1"))
        assert call_to_step("done", "", ctx) == Finish(value=None)

        isolated = _ctx(mode=HandlerMode.ISOLATED)
        assert call_to_step("eval", '{"src": "xs"}', isolated) == Emit(effect=IsolatedEval(src="xs"))

        tools = _ctx(mode=HandlerMode.TOOLS, tools=[ToolSpec(name="upper", description="")])
        assert call_to_step("upper", '{"arg": "a"}', tools) == Emit(effect=Call(tool="upper", arg="a"))

    @pytest.mark.parametrize(
        "name,arguments",
        [
            ("fly", "{}"),
            ("lookup", "{not json"),
            ("lookup", "[]"),
            ("lookup", '{"var": 3}'),
            ("assign", '{"var": "x"}'),
            ("set", '{"ref": {"$ref": -1}, "value": 1}'),
            ("upper", '{"arg": 1}'),
        ],
    )
    def test_malformed_calls(self, name, arguments):
        """Unknown tools and bad arguments raise MalformedStep."""
        with pytest.raises(MalformedStep):
            call_to_step(name, arguments, _ctx())

    def test_effect_to_call_inverts_call_to_step(self):
        """An effect written as a tool call reads back as the same effect."""
        ctx = _ctx()
        for effect in [
            Lookup(var="query"),
            Assign(var="response", value=[1, {"a": RefTag(id=2)}]),
            Goto(label="found", payload="ben"),
            SharedEval(src="len(xs)"),
        ]:
            name, args = effect_to_call(effect)
            assert call_to_step(name, json.dumps(args), ctx) == Emit(effect=effect)

    def test_messages_replay_history(self):
        """The transcript replays history as tool calls and ends with the feedback."""
        history = [
            TraceEntry(effect=Lookup(var="query"), response=Ok(value="hi")),
            TraceEntry(effect=Lookup(var="nope"), response=Err(code=ErrCode.FORBIDDEN_VAR, message="no")),
        ]
        feedback = Err(code=ErrCode.TYPE_ERROR, message="reply has no tool call")
        ctx = _ctx(history=history, eager_vars=[EagerVar(name="query", type="String", value="hi")], feedback=feedback)
        messages = build_messages(load_template(), ctx)
        assert [m["role"] for m in messages] == ["system", "user", "assistant", "tool", "assistant", "tool", "user"]
        assert '- query: String = "hi"' in messages[1]["content"]
        assert messages[3]["content"] == '{"ok":{"string":"hi"}}'
        assert messages[4]["tool_calls"][0]["function"]["name"] == "lookup"
        assert "reply has no tool call" in messages[-1]["content"]
        assert "lookup" in messages[0]["content"]

    def test_template_override(self, tmp_path):
        """A missing or incomplete template file raises StoreIO."""
        with pytest.raises(StoreIO):
            load_template(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("system: only\n")
        with pytest.raises(StoreIO):
            load_template(bad)


def _reply(name: str, arguments: dict) -> dict:
    call = {"id": "c", "type": "function", "function": {"name": name, "arguments": json.dumps(arguments)}}
    return {"choices": [{"message": {"role": "assistant", "content": None, "tool_calls": [call]}}]}


class ChatEndpoint:
    """MockTransport handler answering from the number of tool results in the transcript."""

    def __init__(self, replies: list[dict], failures: list[int] | None = None):
        self.replies = replies
        self.failures = list(failures or [])
        self.requests: list[dict] = []

    def __call__(self, request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        self.requests.append(body)
        if self.failures:
            return httpx.Response(self.failures.pop(0), text="busy")
        answered = sum(1 for m in body["messages"] if m["role"] == "tool")
        return httpx.Response(200, json=self.replies[answered])


def _llm(endpoint: ChatEndpoint, **kwargs) -> LLMAgent:
    client = httpx.AsyncClient(base_url="http://llm.test", transport=httpx.MockTransport(endpoint))
    kwargs.setdefault("backoff_seconds", 0)
    return LLMAgent("test-model", client=client, **kwargs)


class TestLLMAgent:
    """Tests for LLMAgent against a mock chat-completions endpoint."""

    @pytest.mark.asyncio
    async def test_reproduces_the_break(self):
        """A model that looks up the query and breaks ends the loop."""
        endpoint = ChatEndpoint([_reply("lookup", {"var": "query"}), _reply("goto", {"label": "break"})])
        agent = _llm(endpoint)
        result = await run_source(EXIT_LOOP, agent)
        await agent.aclose()
        assert result.value == "done"
        assert agent.invocations == 2
        (trace,) = result.traces
        assert trace.entries[0].response == Ok(value="Exit, please.")
        assert trace.terminal == Goto(label="break")

        first = endpoint.requests[0]
        assert first["model"] == "test-model"
        assert first["tool_choice"] == "required"
        assert "Exit, please." in first["messages"][1]["content"]

    @pytest.mark.asyncio
    async def test_retries_rate_limits_and_server_errors(self):
        """429 and 5xx responses are retried."""
        endpoint = ChatEndpoint([_reply("done", {})], failures=[429, 500])
        agent = _llm(endpoint, max_retries=3)
        assert await agent.step(_ctx()) == Finish(value=None)
        assert len(endpoint.requests) == 3

    @pytest.mark.asyncio
    async def test_gives_up_after_max_retries(self):
        """AgentError is raised once the retries run out."""
        endpoint = ChatEndpoint([_reply("done", {})], failures=[503, 503])
        agent = _llm(endpoint, max_retries=2)
        with pytest.raises(AgentError):
            await agent.step(_ctx())

    @pytest.mark.asyncio
    async def test_client_errors_are_not_retried(self):
        """A 4xx other than 429 fails at once."""
        endpoint = ChatEndpoint([_reply("done", {})], failures=[401])
        agent = _llm(endpoint, max_retries=3)
        with pytest.raises(AgentError):
            await agent.step(_ctx())
        assert len(endpoint.requests) == 1

    @pytest.mark.asyncio
    async def test_reply_without_tool_call_is_malformed(self):
        """A reply with only text is a malformed step."""
        endpoint = ChatEndpoint([{"choices": [{"message": {"role": "assistant", "content": "hmm"}}]}])
        with pytest.raises(MalformedStep):
            await _llm(endpoint).step(_ctx())

    @pytest.mark.asyncio
    async def test_malformed_reply_is_reprompted(self):
        """A call to an unknown tool is reported back and the model asked again."""
        replies = [
            _reply("lookup", {"var": "query"}),
            _reply("goto", {"label": "break"}),
        ]

        class Stutter(ChatEndpoint):
            def __call__(self, request):
                if not self.requests:
                    self.requests.append(json.loads(request.content))
                    return httpx.Response(200, json=_reply("teleport", {}))
                return super().__call__(request)

        endpoint = Stutter(replies)
        result = await run_source(EXIT_LOOP, _llm(endpoint))
        assert result.value == "done"
        retry = endpoint.requests[1]["messages"]
        assert retry[-1]["role"] == "user"
        assert "teleport" in retry[-1]["content"]

    def test_fingerprint_depends_on_model(self):
        """The fingerprint changes with the model name."""
        client = httpx.AsyncClient(transport=httpx.MockTransport(ChatEndpoint([])))
        a = LLMAgent("m1", client=client)
        b = LLMAgent("m2", client=client)
        assert a.fingerprint() != b.fingerprint()
        assert a.fingerprint() == LLMAgent("m1", client=client).fingerprint()


class TestPreview:
    """Tests for eager value previews."""

    @pytest.mark.asyncio
    async def test_preview_shapes(self):
        """Eager previews describe refs and lists by shape."""
        agent = ListAgent([Return()])
        result = await run_source('let r = ref "x"; let xs = [1, 2, 3]; natural """Look at <r> and <xs>."""', agent)
        state = type("State", (), {"heap": result.heap})()
        assert preview(result.globals["r"], state) == ("Ref", "Ref(Str)")
        assert preview(result.globals["xs"], state) == ("List", "List(length 3)")
        assert preview(3, state) == ("Int", None)
