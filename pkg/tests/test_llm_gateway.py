import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repocorpus.context import ContextBundle, ContextItem, ContextKind
from repocorpus.llm import (
    Completion,
    Gateway,
    GatewayConfig,
    GatewayError,
    GenRequest,
    Mode,
    RecordingClient,
    ReplayClient,
    Role,
    Sampling,
    ScriptedClient,
    TransportError,
    parse_judge,
    split_reasoning,
)
from repocorpus.llm.synthetic import SyntheticClient, decompose, judge


def gw(script, **kw):
    return Gateway(ScriptedClient(script), GatewayConfig(**kw), sleep=lambda s: None)


def trace_req(k=4, answer="ok"):
    return GenRequest(Role.TRACE_GENERATION, "q", sampling=Sampling(attempts=k), hints={"answer": answer})


# -- request typing ---------------------------------------------------------------


def test_modes_are_fixed_per_role():
    assert GenRequest(Role.TRACE_GENERATION, "p").mode is Mode.REASONING
    assert GenRequest(Role.JUDGE, "p").mode is Mode.CHAT
    with pytest.raises(ValueError):
        GenRequest(Role.TRACE_GENERATION, "p", mode=Mode.CHAT)
    with pytest.raises(ValueError):
        GenRequest(Role.JUDGE, "p", mode=Mode.REASONING)


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        Sampling(attempts=0)


def test_digest_ignores_hints_but_not_attempt():
    a = GenRequest(Role.PARAPHRASE, "p", hints={"x": 1})
    b = GenRequest(Role.PARAPHRASE, "p", hints={"x": 2})
    assert a.digest(1) == b.digest(1)
    assert a.digest(1) != a.digest(2)
    ctx = ContextBundle(ContextKind.FILE_CONTENTS, (ContextItem("f", "t"),))
    assert GenRequest(Role.PARAPHRASE, "p", ctx).digest(1) != a.digest(1)


def test_split_reasoning_tags():
    c = split_reasoning("<think>step one</think>\nanswer")
    assert c.reasoning == "step one" and c.content == "answer"


# -- rejection sampling --------------------------------------------------------------


def test_valid_first_candidate_accepted_at_one():
    g = gw({"trace_generation": ["<think>t</think>good"]})
    r = g.rejection_sample(trace_req(), lambda c: c.response == "good")
    assert r.accepted and r.attempt_index == 1 and g.counter.generations == 1


def test_accepted_at_third_attempt():
    g = gw({"trace_generation": ["<think>t</think>bad", "<think>t</think>bad", "<think>t</think>good"]})
    r = g.rejection_sample(trace_req(k=3), lambda c: c.response == "good")
    assert r.accepted and r.attempt_index == 3


def test_all_reject_returns_last_candidate():
    g = gw({"trace_generation": ["<think>t</think>bad1", "<think>t</think>bad2"]})
    r = g.rejection_sample(trace_req(k=2), lambda c: False)
    assert not r.accepted and r.response == "bad2" and r.attempt_index == 2
    assert g.counter.generations == 2


@settings(max_examples=60, deadline=None)
@given(k=st.integers(1, 6), accept_at=st.integers(1, 9))
def test_never_more_than_k_calls(k, accept_at):
    client = ScriptedClient(lambda req, attempt: f"<think>t</think>{attempt}")
    g = Gateway(client, GatewayConfig(), sleep=lambda s: None)
    r = g.rejection_sample(trace_req(k=k), lambda c: c.response == str(accept_at))
    assert len(client.calls) <= k
    assert r.accepted == (accept_at <= k)
    if r.accepted:
        assert r.attempt_index == accept_at <= k


def test_transport_errors_retried_then_surfaced():
    sleeps = []
    client = ScriptedClient({"judge": [TransportError("503"), TransportError("503"), "VERDICT: consistent\nRATIONALE: fine"]})
    g = Gateway(client, GatewayConfig(transport_retries=3, backoff_seconds=0.1), sleep=sleeps.append)
    assert g.generate(GenRequest(Role.JUDGE, "p")).content.startswith("VERDICT")
    assert sleeps == [0.1, 0.2]
    assert g.counter.generations == 1 and g.counter.transport_failures == 2

    g2 = gw({"judge": [TransportError("down")]}, transport_retries=1)
    with pytest.raises(GatewayError, match="transport failed after 2"):
        g2.generate(GenRequest(Role.JUDGE, "p"))


# -- judging ------------------------------------------------------------------------


def test_identical_texts_consistent_without_a_call():
    g = gw({})
    assert g.judge_consistency("a b", "a b").consistent
    assert g.counter.generations == 0


def test_scripted_inconsistent():
    g = gw({"judge": ["VERDICT: inconsistent\nRATIONALE: wrong callee"]})
    v = g.judge_consistency("x", "y")
    assert not v.consistent and v.rationale == "wrong callee"


def test_empty_candidate_is_precondition_error():
    with pytest.raises(ValueError):
        gw({}).judge_consistency("ref", "  ")


@pytest.mark.parametrize(
    "raw",
    [
        "",
        "looks consistent to me",
        "VERDICT: maybe",
        "VERDICT: consistent\nVERDICT: inconsistent",
        "verdict consistent",
    ],
)
def test_malformed_judge_fails_closed(raw):
    assert not parse_judge(raw).consistent
    assert not gw({"judge": [raw]}).judge_consistency("x", "y").consistent


def test_judge_gateway_failure_fails_closed():
    g = gw({"judge": [GatewayError("boom")]})
    v = g.judge_consistency("x", "y")
    assert not v.consistent and "unavailable" in v.rationale


# -- transcripts ----------------------------------------------------------------------


def test_record_then_replay(tmp_path):
    path = tmp_path / "t.jsonl"
    rec = Gateway(RecordingClient(SyntheticClient(1), path))
    req = GenRequest(Role.PARAPHRASE, "p", hints={"statement": "A calls B", "n": 2, "names": ("A", "B")})
    first = rec.generate(req, 1)
    lines = [json.loads(x) for x in path.read_text().splitlines()]
    assert lines[0]["digest"] == req.digest(1)
    replay = Gateway(ReplayClient(path))
    assert replay.generate(req, 1) == first
    with pytest.raises(GatewayError):
        replay.generate(req, 2)


def test_config_validation():
    with pytest.raises(ValueError):
        GatewayConfig(backend="nope")
    with pytest.raises(ValueError):
        GatewayConfig(backend="replay")
    with pytest.raises(ValueError):
        GatewayConfig(attempts=0)


def test_env_overrides_endpoint(monkeypatch):
    monkeypatch.setenv("REPOCORPUS_ENDPOINT", "http://localhost:9/v1")
    assert GatewayConfig(backend="http").with_env().endpoint == "http://localhost:9/v1"


def test_map_keeps_order():
    g = Gateway(ScriptedClient({}), GatewayConfig(concurrency=4))
    assert g.map(lambda x: x * 2, range(20)) == [x * 2 for x in range(20)]


# -- synthetic backend ------------------------------------------------------------------


def test_synthetic_is_deterministic():
    req = GenRequest(Role.PARAPHRASE, "p", hints={"statement": "A calls B", "n": 3, "names": ("A", "B")})
    a = SyntheticClient(5).complete(req, 1)
    assert a == SyntheticClient(5).complete(req, 1)
    assert all("A" in ln and "B" in ln for ln in a.content.splitlines())


def test_synthetic_judge_overlap():
    assert "VERDICT: consistent" in judge({"reference": "x = f(1, 2)", "candidate": "x  =  f(1, 2)"})
    assert "VERDICT: inconsistent" in judge({"reference": "x = f(1, 2)", "candidate": "I am not sure."})


def test_synthetic_decompose_keeps_every_assertion():
    body = "def test_t():\n    s = Stock()\n    s.put('a', 3)\n    assert s.level('a') == 3\n    assert s.level('b') == 0\n    assert s\n"
    out = decompose({"language": "python", "entry": "build_t", "test_body": body, "test_short": "test_t"})
    assert out["assertions"].count("assert ") == 3
    assert "def build_t():" in out["functional_code"] and "return s" in out["functional_code"]


def test_synthetic_decompose_skips_pure_assertion():
    body = "def test_c():\n    assert 1 + 1 == 2\n"
    assert decompose({"language": "python", "entry": "build_c", "test_body": body}) is None


def test_completion_record_roundtrip():
    c = Completion("a", "b")
    assert Completion.from_record(c.to_record()) == c


def test_recording_flags_conflicting_responses(tmp_path):
    answers = iter(["one", "two"])
    rec = RecordingClient(ScriptedClient(lambda req, attempt: next(answers)), tmp_path / "t.jsonl")
    req = GenRequest(Role.JUDGE, "same prompt")
    rec.complete(req, 1)
    rec.complete(req, 1)
    assert rec.conflicts == 1
    assert len((tmp_path / "t.jsonl").read_text().splitlines()) == 1
